//! Product update, the DBU decision procedure, and instance parameters.
//!
//! The decision procedure builds the final updated model explicitly, one
//! product per action, and then checks the query at its designated worlds.
//! Run time is polynomial in `|W_0| * e^u` and the query size.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::events::{applicable_with, validate_action, Action, EventId, Postcondition};
use crate::formula::{AgentId, Formula, FormulaError, PropId};
use crate::kripke::{
    evaluate_pointed, validate_state, validate_vocabulary, EpistemicModel, EpistemicState, EvalError, Evaluator,
    Relation, World,
};
use crate::violation::Violation;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("action is not applicable: no designated event's precondition holds at a designated world")]
    NotApplicable,
    #[error("event `{0}` has postcondition F")]
    Contradiction(EventId),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `(M, W_d) ⊗ (E, E_d)`.
///
/// Fails with [`UpdateError::NotApplicable`] instead of producing a state
/// with no designated worlds.
pub fn product_update(state: &EpistemicState, action: &Action) -> Result<EpistemicState, UpdateError> {
    let model = &state.model;
    let events = &action.model.events;
    if let Some(e) = events.iter().find(|e| matches!(e.post, Postcondition::Contradiction)) {
        return Err(UpdateError::Contradiction(e.id.clone()));
    }
    let eval = Evaluator::new(model);
    if !applicable_with(&eval, state, action)? {
        return Err(UpdateError::NotApplicable);
    }
    let pre: Vec<Vec<bool>> = events
        .iter()
        .map(|e| eval.truth_set(&e.pre))
        .collect::<Result<_, _>>()?;

    let n_events = events.len();
    let mut index: Vec<Option<usize>> = vec![None; model.len() * n_events];
    let mut worlds = Vec::new();
    for (w, world) in model.worlds.iter().enumerate() {
        for (e, event) in events.iter().enumerate() {
            if !pre[e][w] {
                continue;
            }
            let facts = event.post.apply(&world.facts).expect("contradictions rejected above");
            index[w * n_events + e] = Some(worlds.len());
            worlds.push(World {
                id: world.id.paired(&event.id),
                label: world.label.clone(),
                facts,
            });
        }
    }

    let empty = Relation::new();
    let relations = model
        .relations
        .iter()
        .map(|(agent, rel)| {
            let event_rel = action.model.relations.get(agent).unwrap_or(&empty);
            let mut out = Relation::new();
            for &(w, v) in rel {
                for &(e, f) in event_rel {
                    let from = index.get(w * n_events + e).copied().flatten();
                    let to = index.get(v * n_events + f).copied().flatten();
                    if let (Some(from), Some(to)) = (from, to) {
                        out.insert((from, to));
                    }
                }
            }
            (agent.clone(), out)
        })
        .collect();

    let designated: BTreeSet<usize> = state
        .designated
        .iter()
        .flat_map(|&w| action.designated.iter().map(move |&e| (w, e)))
        .filter_map(|(w, e)| index.get(w * n_events + e).copied().flatten())
        .collect();
    debug_assert!(!designated.is_empty());

    Ok(EpistemicState {
        model: EpistemicModel { worlds, relations },
        designated,
    })
}

/// One broken invariant somewhere in an instance.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InstanceViolation {
    #[error("vocabulary: {0}")]
    Vocabulary(Violation),
    #[error("no propositions declared")]
    NoProps,
    #[error("no agents declared")]
    NoAgents,
    #[error("initial state: {0}")]
    Initial(Violation),
    #[error("action {step}: {violation}")]
    Action { step: usize, violation: Violation },
    #[error("query: {0}")]
    Query(FormulaError),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid instance: {}", DisplayList(.0))]
    Invalid(Vec<InstanceViolation>),
    #[error("action {step}: {source}")]
    Step { step: usize, source: UpdateError },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

struct DisplayList<'a, T>(&'a [T]);

impl<T: fmt::Display> fmt::Display for DisplayList<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

/// Folds [`product_update`] over `actions`. Steps are numbered from 1.
pub fn apply_sequence(state: &EpistemicState, actions: &[Action]) -> Result<EpistemicState, EngineError> {
    apply_sequence_inspect(state, actions, |_, _| {})
}

/// Like [`apply_sequence`], calling `inspect(i, s_i)` for the initial state
/// (`i = 0`) and after every update.
pub fn apply_sequence_inspect<F>(
    state: &EpistemicState,
    actions: &[Action],
    mut inspect: F,
) -> Result<EpistemicState, EngineError>
where
    F: FnMut(usize, &EpistemicState),
{
    inspect(0, state);
    let mut current = state.clone();
    for (i, action) in actions.iter().enumerate() {
        current = product_update(&current, action).map_err(|source| EngineError::Step { step: i + 1, source })?;
        inspect(i + 1, &current);
    }
    Ok(current)
}

/// `(P, A, s_0, a_1 ... a_k, φ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbuInstance {
    pub props: BTreeSet<PropId>,
    pub agents: BTreeSet<AgentId>,
    pub initial: EpistemicState,
    pub actions: Vec<Action>,
    pub query: Formula,
}

impl DbuInstance {
    pub fn validate(&self) -> Vec<InstanceViolation> {
        let mut out: Vec<InstanceViolation> = validate_vocabulary(&self.agents, &self.props)
            .into_iter()
            .map(InstanceViolation::Vocabulary)
            .collect();
        if self.props.is_empty() {
            out.push(InstanceViolation::NoProps);
        }
        if self.agents.is_empty() {
            out.push(InstanceViolation::NoAgents);
        }
        out.extend(
            validate_state(&self.initial, &self.agents, &self.props)
                .into_iter()
                .map(InstanceViolation::Initial),
        );
        for (i, action) in self.actions.iter().enumerate() {
            out.extend(
                validate_action(action, &self.agents, &self.props)
                    .into_iter()
                    .map(|violation| InstanceViolation::Action { step: i + 1, violation }),
            );
        }
        if let Err(e) = self.query.check_symbols(&self.agents, &self.props) {
            out.push(InstanceViolation::Query(e));
        }
        out
    }

    fn ensure_valid(&self) -> Result<(), EngineError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(EngineError::Invalid(violations))
        }
    }
}

/// Decides whether `s_0 ⊗ a_1 ⊗ ... ⊗ a_k |= φ`.
pub fn solve_dbu(inst: &DbuInstance) -> Result<bool, EngineError> {
    inst.ensure_valid()?;
    let last = apply_sequence(&inst.initial, &inst.actions)?;
    Ok(evaluate_pointed(&last, &inst.query)?)
}

/// The seven instance parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParameterVector {
    /// Number of agents.
    pub a: usize,
    /// Largest precondition size.
    pub c: usize,
    /// Largest number of events in one action.
    pub e: usize,
    /// Size of the query.
    pub f: usize,
    /// Modal depth of the query.
    pub o: usize,
    /// Number of propositions.
    pub p: usize,
    /// Number of actions.
    pub u: usize,
}

impl fmt::Display for ParameterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={} c={} e={} f={} o={} p={} u={}",
            self.a, self.c, self.e, self.f, self.o, self.p, self.u
        )
    }
}

pub fn extract_parameters(inst: &DbuInstance) -> ParameterVector {
    let events = inst.actions.iter().flat_map(|a| a.model.events.iter());
    ParameterVector {
        a: inst.agents.len(),
        c: events.map(|e| e.pre.size()).max().unwrap_or(0),
        e: inst.actions.iter().map(|a| a.model.len()).max().unwrap_or(0),
        f: inst.query.size(),
        o: inst.query.modal_depth(),
        p: inst.props.len(),
        u: inst.actions.len(),
    }
}

/// `initial_worlds * max_events^steps`, saturating.
pub fn world_bound(initial_worlds: usize, max_events: usize, steps: usize) -> u128 {
    let steps = u32::try_from(steps).unwrap_or(u32::MAX);
    (max_events as u128)
        .checked_pow(steps)
        .and_then(|p| p.checked_mul(initial_worlds as u128))
        .unwrap_or(u128::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeBound {
    pub actual_final_worlds: usize,
    pub bound: u128,
}

impl SizeBound {
    pub fn holds(&self) -> bool {
        self.actual_final_worlds as u128 <= self.bound
    }
}

pub fn size_bound_check(inst: &DbuInstance) -> Result<SizeBound, EngineError> {
    inst.ensure_valid()?;
    let last = apply_sequence(&inst.initial, &inst.actions)?;
    let params = extract_parameters(inst);
    Ok(SizeBound {
        actual_final_worlds: last.model.len(),
        bound: world_bound(inst.initial.model.len(), params.e, params.u),
    })
}
