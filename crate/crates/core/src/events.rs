//! Pointed event models (actions) and applicability.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{product_update, UpdateError};
use crate::formula::{is_name_token, AgentId, Formula, PropId};
use crate::kripke::{check_designated, check_relations, EpistemicState, EvalError, Evaluator, FrameReport, Relation};
use crate::violation::Violation;

crate::formula::name_type!(
    /// Identifies an event within an event model.
    EventId
);

/// Factual change performed by an event: a conjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Postcondition {
    /// Each mapped proposition is set to the given value; an empty map is `T`.
    Assign(BTreeMap<PropId, bool>),
    /// `F`. Representable so that it can be reported, never applied.
    Contradiction,
}

impl Postcondition {
    pub fn none() -> Self {
        Postcondition::Assign(BTreeMap::new())
    }

    pub fn assign<I, P>(literals: I) -> Self
    where
        I: IntoIterator<Item = (P, bool)>,
        P: Into<PropId>,
    {
        Postcondition::Assign(literals.into_iter().map(|(p, v)| (p.into(), v)).collect())
    }

    /// Syntactic entailment: `Some(true)` if the postcondition entails `p`,
    /// `Some(false)` if it entails `~p`, `None` otherwise.
    pub fn entails(&self, p: &PropId) -> Option<bool> {
        match self {
            Postcondition::Assign(m) => m.get(p).copied(),
            Postcondition::Contradiction => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Postcondition::Assign(m) if m.is_empty())
    }

    /// Facts of `(w, e)` given the facts of `w`. `None` for `F`.
    pub fn apply(&self, facts: &BTreeSet<PropId>) -> Option<BTreeSet<PropId>> {
        let Postcondition::Assign(m) = self else {
            return None;
        };
        let mut out = facts.clone();
        for (p, &value) in m {
            if value {
                out.insert(p.clone());
            } else {
                out.remove(p);
            }
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub label: Option<String>,
    pub pre: Formula,
    pub post: Postcondition,
}

impl Event {
    pub fn new(id: impl Into<EventId>, pre: Formula, post: Postcondition) -> Self {
        Self {
            id: id.into(),
            label: None,
            pre,
            post,
        }
    }
}

/// `(E, Q, pre, post)`, with events addressed by position.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EventModel {
    pub events: Vec<Event>,
    pub relations: BTreeMap<AgentId, Relation>,
}

impl EventModel {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn frame_report(&self) -> FrameReport {
        FrameReport::from_relations(self.len(), &self.relations)
    }
}

/// A pointed event model `(E, E_d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub model: EventModel,
    pub designated: BTreeSet<usize>,
}

impl Action {
    pub fn new(model: EventModel, designated: impl IntoIterator<Item = usize>) -> Self {
        Self {
            model,
            designated: designated.into_iter().collect(),
        }
    }

    /// The action with one event, precondition `top`, no factual change, and
    /// a reflexive loop for every agent.
    pub fn identity<'a>(agents: impl IntoIterator<Item = &'a AgentId>, top: Formula) -> Self {
        let relations = agents
            .into_iter()
            .map(|a| (a.clone(), [(0, 0)].into_iter().collect()))
            .collect();
        Action::new(
            EventModel {
                events: vec![Event::new("e", top, Postcondition::none())],
                relations,
            },
            [0],
        )
    }

    /// Reorders events by identifier, remapping relations and the designated set.
    pub fn canonicalize(self) -> Self {
        let mut order: Vec<usize> = (0..self.model.len()).collect();
        order.sort_by(|&a, &b| self.model.events[a].id.cmp(&self.model.events[b].id));
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self;
        }
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let remap = |i: usize| new_index.get(i).copied().unwrap_or(i);
        let mut old: Vec<Option<Event>> = self.model.events.into_iter().map(Some).collect();
        let events = order.iter().map(|&o| old[o].take().expect("permutation")).collect();
        let relations = self
            .model
            .relations
            .into_iter()
            .map(|(a, r)| (a, r.into_iter().map(|(u, v)| (remap(u), remap(v))).collect()))
            .collect();
        Action {
            model: EventModel { events, relations },
            designated: self.designated.into_iter().map(remap).collect(),
        }
    }
}

pub fn validate_action(action: &Action, agents: &BTreeSet<AgentId>, props: &BTreeSet<PropId>) -> Vec<Violation> {
    let mut out = Vec::new();
    let model = &action.model;
    if model.is_empty() {
        out.push(Violation::NoEvents);
    }
    let mut seen = BTreeSet::new();
    for e in &model.events {
        if !is_name_token(e.id.as_str()) {
            out.push(Violation::InvalidName(e.id.as_str().into()));
        }
        if !seen.insert(&e.id) {
            out.push(Violation::DuplicateEvent(e.id.clone()));
        }
        if let Err(error) = e.pre.check_symbols(agents, props) {
            out.push(Violation::Precondition {
                event: e.id.clone(),
                error,
            });
        }
        match &e.post {
            Postcondition::Assign(m) => {
                for p in m.keys().filter(|p| !props.contains(*p)) {
                    out.push(Violation::UnknownPostProp {
                        event: e.id.clone(),
                        prop: p.clone(),
                    });
                }
            }
            Postcondition::Contradiction => out.push(Violation::BottomPostcondition { event: e.id.clone() }),
        }
    }
    check_relations(&model.relations, model.len(), agents, &mut out);
    check_designated(&action.designated, model.len(), &mut out);
    out
}

/// Some designated event's precondition holds at some designated world.
pub fn is_applicable(state: &EpistemicState, action: &Action) -> Result<bool, EvalError> {
    applicable_with(&Evaluator::new(&state.model), state, action)
}

pub(crate) fn applicable_with(
    eval: &Evaluator<'_>,
    state: &EpistemicState,
    action: &Action,
) -> Result<bool, EvalError> {
    for &e in &action.designated {
        let Some(event) = action.model.events.get(e) else {
            continue;
        };
        let truth = eval.truth_set(&event.pre)?;
        if state.designated.iter().any(|&w| truth.get(w).copied().unwrap_or(false)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Each action is applicable in the state produced by the ones before it.
/// The empty sequence is always applicable.
pub fn is_applicable_sequence(state: &EpistemicState, actions: &[Action]) -> Result<bool, EvalError> {
    let Some((last, prefix)) = actions.split_last() else {
        return Ok(true);
    };
    let mut current = state.clone();
    for action in prefix {
        current = match product_update(&current, action) {
            Ok(next) => next,
            Err(UpdateError::NotApplicable) => return Ok(false),
            Err(UpdateError::Eval(e)) => return Err(e),
            // Not applicable at all: the bottom postcondition leaves no worlds.
            Err(UpdateError::Contradiction(_)) => return Ok(false),
        };
    }
    is_applicable(&current, last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{EpistemicModel, World, WorldId};

    fn names<T: From<&'static str> + Ord>(xs: &[&'static str]) -> BTreeSet<T> {
        xs.iter().map(|&x| T::from(x)).collect()
    }

    fn state() -> EpistemicState {
        let model = EpistemicModel {
            worlds: vec![World::new(WorldId::new("w")).with_facts(["p"]), World::new(WorldId::new("v"))],
            relations: [(AgentId::from("a"), [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().collect())]
                .into_iter()
                .collect(),
        };
        EpistemicState::new(model, [0])
    }

    #[test]
    fn identity_action_validates() {
        let agents = names(&["a"]);
        let a = Action::identity(&agents, Formula::top("p"));
        assert!(validate_action(&a, &agents, &names(&["p"])).is_empty());
    }

    #[test]
    fn unknown_post_prop() {
        let agents = names(&["a"]);
        let mut a = Action::identity(&agents, Formula::top("p"));
        a.model.events[0].post = Postcondition::assign([("q", true)]);
        assert_eq!(
            validate_action(&a, &agents, &names(&["p"])),
            vec![Violation::UnknownPostProp {
                event: "e".into(),
                prop: "q".into()
            }]
        );
    }

    #[test]
    fn bottom_postcondition_rejected() {
        let agents = names(&["a"]);
        let mut a = Action::identity(&agents, Formula::top("p"));
        a.model.events[0].post = Postcondition::Contradiction;
        assert_eq!(
            validate_action(&a, &agents, &names(&["p"])),
            vec![Violation::BottomPostcondition { event: "e".into() }]
        );
    }

    #[test]
    fn applicability() {
        let s = state();
        let agents = names(&["a"]);
        assert!(is_applicable(&s, &Action::identity(&agents, Formula::top("p"))).unwrap());
        assert!(!is_applicable(&s, &Action::identity(&agents, Formula::bottom("p"))).unwrap());
        // pre ~p fails at the designated world even though v satisfies it
        assert!(!is_applicable(&s, &Action::identity(&agents, Formula::not(Formula::prop("p")))).unwrap());
    }

    #[test]
    fn sequences() {
        let s = state();
        let agents = names(&["a"]);
        let id = Action::identity(&agents, Formula::top("p"));
        let never = Action::identity(&agents, Formula::bottom("p"));
        assert!(is_applicable_sequence(&s, &[]).unwrap());
        assert!(is_applicable_sequence(&s, &[id.clone(), id.clone()]).unwrap());
        assert!(!is_applicable_sequence(&s, core::slice::from_ref(&never)).unwrap());
        assert!(!is_applicable_sequence(&s, &[never, id]).unwrap());
    }

    #[test]
    fn postcondition_entailment() {
        let post = Postcondition::assign([("p", true), ("q", false)]);
        assert_eq!(post.entails(&"p".into()), Some(true));
        assert_eq!(post.entails(&"q".into()), Some(false));
        assert_eq!(post.entails(&"r".into()), None);
        let facts = names(&["q", "r"]);
        assert_eq!(post.apply(&facts), Some(names(&["p", "r"])));
        assert_eq!(Postcondition::Contradiction.apply(&facts), None);
    }
}
