//! Model checking for dynamic epistemic logic.
//!
//! Given a pointed epistemic model, a sequence of pointed event models and a
//! belief formula, [`engine::solve_dbu`] decides whether the formula holds
//! after applying every event model by product update. [`reductions`] turns
//! quantified Boolean formulas into such instances, which lets the engine be
//! checked against a brute-force QBF evaluator.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod engine;
pub mod events;
pub mod formula;
pub mod kripke;
pub mod reductions;
mod violation;

pub use engine::{
    apply_sequence, extract_parameters, product_update, size_bound_check, solve_dbu, world_bound, DbuInstance, EngineError,
    InstanceViolation, ParameterVector, SizeBound, UpdateError,
};
pub use events::{is_applicable, is_applicable_sequence, validate_action, Action, Event, EventId, EventModel, Postcondition};
pub use formula::{parse_formula, AgentId, Formula, FormulaError, PropId};
pub use kripke::{
    evaluate, evaluate_pointed, frame_report, validate_state, EpistemicModel, EpistemicState, EvalError, FrameClass,
    FrameReport, World, WorldId,
};
pub use reductions::{parse_qbf, qbf_brute_force, reduce_tqbf_to_dbu, Qbf, QbfError};
pub use violation::Violation;
