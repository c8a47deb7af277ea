use std::collections::{BTreeMap, BTreeSet};

use dbu_core::engine::{product_update, world_bound};
use dbu_core::events::{is_applicable, Event, EventModel, Postcondition};
use dbu_core::formula::parse_formula;
use dbu_core::kripke::{evaluate, evaluate_pointed, EpistemicModel, EpistemicState, Relation, World, WorldId};
use dbu_core::reductions::equivalence_closure;
use dbu_core::{Action, AgentId, Formula, PropId};
use proptest::prelude::*;

const AGENTS: [&str; 3] = ["a", "b", "c"];
const PROPS: [&str; 3] = ["p", "q", "r"];

fn agent_set() -> BTreeSet<AgentId> {
    AGENTS.iter().map(|&a| AgentId::from(a)).collect()
}

fn prop_set() -> BTreeSet<PropId> {
    PROPS.iter().map(|&p| PropId::from(p)).collect()
}

fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop::sample::select(&PROPS[..]).prop_map(Formula::prop);
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (prop::sample::select(&AGENTS[..]), inner).prop_map(|(a, f)| Formula::believes(a, f)),
        ]
    })
}

fn relation(n: usize) -> impl Strategy<Value = Relation> {
    prop::collection::btree_set((0..n, 0..n), 0..=n * n)
}

fn model() -> impl Strategy<Value = EpistemicModel> {
    (1usize..=6).prop_flat_map(|n| {
        let worlds = prop::collection::vec(prop::collection::btree_set(prop::sample::select(&PROPS[..]), 0..=3), n);
        let rels = prop::collection::vec(relation(n), AGENTS.len());
        (worlds, rels).prop_map(|(facts, rels)| EpistemicModel {
            worlds: facts
                .into_iter()
                .enumerate()
                .map(|(i, f)| World::new(WorldId::new(format!("w{i}"))).with_facts(f))
                .collect(),
            relations: AGENTS.iter().map(|&a| AgentId::from(a)).zip(rels).collect(),
        })
    })
}

fn state() -> impl Strategy<Value = EpistemicState> {
    model().prop_flat_map(|m| {
        let n = m.len();
        prop::collection::btree_set(0..n, 1..=n).prop_map(move |d| EpistemicState {
            model: m.clone(),
            designated: d,
        })
    })
}

fn action() -> impl Strategy<Value = Action> {
    (1usize..=3).prop_flat_map(|n| {
        let pres = prop::collection::vec(formula(2), n);
        let posts = prop::collection::vec(
            prop::collection::btree_map(prop::sample::select(&PROPS[..]), any::<bool>(), 0..=2),
            n,
        );
        let rels = prop::collection::vec(relation(n), AGENTS.len());
        let designated = prop::collection::btree_set(0..n, 1..=n);
        (pres, posts, rels, designated).prop_map(|(pres, posts, rels, designated)| {
            let events = pres
                .into_iter()
                .zip(posts)
                .enumerate()
                .map(|(i, (pre, post))| {
                    Event::new(format!("e{i}").as_str(), pre, Postcondition::Assign(post.into_iter().map(|(p, v)| (PropId::from(p), v)).collect()))
                })
                .collect();
            Action {
                model: EventModel {
                    events,
                    relations: AGENTS.iter().map(|&a| AgentId::from(a)).zip(rels).collect(),
                },
                designated,
            }
        })
    })
}

/// Truth by direct recursion over the formula, reading relations as pair sets.
fn naive(m: &EpistemicModel, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Prop(p) => m.worlds[w].facts.contains(p),
        Formula::Not(g) => !naive(m, w, g),
        Formula::And(l, r) => naive(m, w, l) && naive(m, w, r),
        Formula::Believes(a, g) => m.relations[a]
            .iter()
            .filter(|&&(u, _)| u == w)
            .all(|&(_, v)| naive(m, v, g)),
    }
}

/// Depth and size from a table of per-connective rules, computed with an
/// explicit post-order stack rather than recursion.
fn table_metrics(f: &Formula) -> (usize, usize) {
    // (depth increment, size increment) per node kind
    let rule = |f: &Formula| match f {
        Formula::Prop(_) => (0, 1),
        Formula::Not(_) | Formula::And(..) => (0, 1),
        Formula::Believes(..) => (1, 1),
    };
    let mut results: Vec<(usize, usize)> = Vec::new();
    let mut stack: Vec<(&Formula, bool)> = vec![(f, false)];
    while let Some((node, expanded)) = stack.pop() {
        let children: Vec<&Formula> = match node {
            Formula::Prop(_) => vec![],
            Formula::Not(g) | Formula::Believes(_, g) => vec![g],
            Formula::And(l, r) => vec![l, r],
        };
        if !expanded && !children.is_empty() {
            stack.push((node, true));
            for c in children.into_iter().rev() {
                stack.push((c, false));
            }
            continue;
        }
        let arity = match node {
            Formula::Prop(_) => 0,
            Formula::And(..) => 2,
            _ => 1,
        };
        let kids = results.split_off(results.len() - arity);
        let (dd, ds) = rule(node);
        let depth = kids.iter().map(|k| k.0).max().unwrap_or(0) + dd;
        let size = kids.iter().map(|k| k.1).sum::<usize>() + ds;
        results.push((depth, size));
    }
    results[0]
}

fn permute(m: &EpistemicModel, perm: &[usize]) -> EpistemicModel {
    let mut worlds = vec![None; m.len()];
    for (old, &new) in perm.iter().enumerate() {
        worlds[new] = Some(m.worlds[old].clone());
    }
    EpistemicModel {
        worlds: worlds.into_iter().map(Option::unwrap).collect(),
        relations: m
            .relations
            .iter()
            .map(|(a, r)| (a.clone(), r.iter().map(|&(u, v)| (perm[u], perm[v])).collect()))
            .collect(),
    }
}

proptest! {
    #[test]
    fn print_parse_round_trip(f in formula(8)) {
        let text = f.to_string();
        let back = parse_formula(&text, &agent_set(), &prop_set()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn metrics_match_table_oracle(f in formula(8)) {
        prop_assert_eq!(table_metrics(&f), (f.modal_depth(), f.size()));
        prop_assert!(f.modal_depth() <= f.size());
        prop_assert_eq!(Formula::not(f.clone()).modal_depth(), f.modal_depth());
        prop_assert_eq!(Formula::believes("a", f.clone()).modal_depth(), 1 + f.modal_depth());
        prop_assert!(Formula::not(f.clone()).size() > f.size());
    }

    #[test]
    fn evaluation_matches_naive_recursion(m in model(), f in formula(5)) {
        for w in 0..m.len() {
            prop_assert_eq!(evaluate(&m, w, &f).unwrap(), naive(&m, w, &f));
        }
    }

    #[test]
    fn truth_clauses(m in model(), f in formula(4), g in formula(4)) {
        for w in 0..m.len() {
            let ef = evaluate(&m, w, &f).unwrap();
            let eg = evaluate(&m, w, &g).unwrap();
            prop_assert_eq!(evaluate(&m, w, &Formula::not(f.clone())).unwrap(), !ef);
            prop_assert_eq!(evaluate(&m, w, &Formula::and(f.clone(), g.clone())).unwrap(), ef && eg);
            prop_assert_eq!(evaluate(&m, w, &Formula::or(f.clone(), g.clone())).unwrap(), ef || eg);
            prop_assert_eq!(evaluate(&m, w, &Formula::implies(f.clone(), g.clone())).unwrap(), !ef || eg);
            let a = AgentId::from("b");
            let some_succ = m.successors(&a, w).any(|v| evaluate(&m, v, &f).unwrap());
            prop_assert_eq!(evaluate(&m, w, &Formula::possible("b", f.clone())).unwrap(), some_succ);
            if m.successors(&a, w).next().is_none() {
                prop_assert!(evaluate(&m, w, &Formula::believes("b", f.clone())).unwrap());
            }
        }
    }

    #[test]
    fn parsed_sugar_matches_its_meaning(m in model(), f in formula(3), g in formula(3)) {
        let parse = |t: String| parse_formula(&t, &agent_set(), &prop_set()).unwrap();
        let or = parse(format!("({f}) | ({g})"));
        let imp = parse(format!("({f}) -> ({g})"));
        let dia = parse(format!("D[c] ({f})"));
        for w in 0..m.len() {
            let ef = naive(&m, w, &f);
            let eg = naive(&m, w, &g);
            prop_assert_eq!(evaluate(&m, w, &or).unwrap(), ef || eg);
            prop_assert_eq!(evaluate(&m, w, &imp).unwrap(), !ef || eg);
            let some = m.successors(&AgentId::from("c"), w).any(|v| naive(&m, v, &f));
            prop_assert_eq!(evaluate(&m, w, &dia).unwrap(), some);
        }
    }

    #[test]
    fn pointed_truth_is_conjunction(s in state(), f in formula(5)) {
        let all = s.designated.iter().all(|&w| evaluate(&s.model, w, &f).unwrap());
        prop_assert_eq!(evaluate_pointed(&s, &f).unwrap(), all);
    }

    #[test]
    fn knowledge_is_factive_on_s5(m in model(), f in formula(4)) {
        let n = m.len();
        let m = EpistemicModel {
            relations: m
                .relations
                .iter()
                .map(|(a, r)| (a.clone(), equivalence_closure(n, &r.iter().copied().collect::<Vec<_>>())))
                .collect(),
            ..m
        };
        prop_assert!(m.frame_report().s5);
        for w in 0..n {
            if evaluate(&m, w, &Formula::believes("a", f.clone())).unwrap() {
                prop_assert!(evaluate(&m, w, &f).unwrap());
            }
        }
    }

    #[test]
    fn frame_report_ignores_world_order(m in model(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..m.len()).collect();
        // Fisher-Yates with a fixed LCG keeps this independent of the proptest RNG
        let mut x = seed | 1;
        for i in (1..perm.len()).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(m.frame_report(), permute(&m, &perm).frame_report());
    }

    #[test]
    fn identity_update_is_isomorphic(s in state()) {
        let id = Action::identity(&agent_set(), Formula::top("p"));
        let out = product_update(&s, &id).unwrap();
        prop_assert_eq!(out.model.len(), s.model.len());
        for (old, new) in s.model.worlds.iter().zip(&out.model.worlds) {
            prop_assert_eq!(new.id.base(), old.id.base());
            prop_assert_eq!(&new.facts, &old.facts);
        }
        prop_assert_eq!(&out.model.relations, &s.model.relations);
        prop_assert_eq!(&out.designated, &s.designated);
    }

    #[test]
    fn updates_respect_definition(s in state(), a in action()) {
        let Ok(out) = product_update(&s, &a) else {
            prop_assert!(!is_applicable(&s, &a).unwrap());
            return Ok(());
        };
        prop_assert!(is_applicable(&s, &a).unwrap());
        prop_assert!(out.model.len() as u128 <= world_bound(s.model.len(), a.model.len(), 1));
        prop_assert!(!out.designated.is_empty());

        let by_id: BTreeMap<String, usize> =
            s.model.worlds.iter().enumerate().map(|(i, w)| (w.id.to_string(), i)).collect();
        let event_of: BTreeMap<&str, usize> =
            a.model.events.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let origin = |i: usize| {
            let id = &out.model.worlds[i].id;
            (by_id[id.base()], event_of[id.trail().last().unwrap().as_str()])
        };
        // every surviving pair satisfies the precondition, and only those survive
        let mut expected = 0;
        for w in 0..s.model.len() {
            for e in 0..a.model.len() {
                expected += usize::from(naive(&s.model, w, &a.model.events[e].pre));
            }
        }
        prop_assert_eq!(out.model.len(), expected);
        for i in 0..out.model.len() {
            let (w, e) = origin(i);
            prop_assert!(naive(&s.model, w, &a.model.events[e].pre));
            for p in PROPS {
                let p = PropId::from(p);
                let before = s.model.worlds[w].facts.contains(&p);
                let after = out.model.worlds[i].facts.contains(&p);
                let expected = match a.model.events[e].post.entails(&p) {
                    Some(v) => v,
                    None => before,
                };
                prop_assert_eq!(after, expected);
            }
        }
        for (agent, rel) in &out.model.relations {
            for i in 0..out.model.len() {
                for j in 0..out.model.len() {
                    let ((w, e), (v, f)) = (origin(i), origin(j));
                    let related = s.model.relations[agent].contains(&(w, v)) && a.model.relations[agent].contains(&(e, f));
                    prop_assert_eq!(rel.contains(&(i, j)), related);
                }
            }
        }
        for &d in &out.designated {
            let (w, e) = origin(d);
            prop_assert!(s.designated.contains(&w) && a.designated.contains(&e));
        }
    }

    #[test]
    fn applicability_is_monotone(s in state(), a in action()) {
        if is_applicable(&s, &a).unwrap() {
            let all_worlds = EpistemicState { designated: (0..s.model.len()).collect(), ..s.clone() };
            prop_assert!(is_applicable(&all_worlds, &a).unwrap());
            let all_events = Action { designated: (0..a.model.len()).collect(), ..a.clone() };
            prop_assert!(is_applicable(&s, &all_events).unwrap());
        }
    }
}
