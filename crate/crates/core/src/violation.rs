use alloc::string::String;

use thiserror::Error;

use crate::events::EventId;
use crate::formula::{AgentId, FormulaError, PropId};
use crate::kripke::WorldId;

/// A broken structural invariant of a state or action. Violations are data:
/// validation collects all of them instead of stopping at the first.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("the model has no worlds")]
    NoWorlds,
    #[error("the event model has no events")]
    NoEvents,
    #[error("empty designated set")]
    EmptyDesignated,
    #[error("designated index {index} is out of range ({size} elements)")]
    DesignatedOutOfRange { index: usize, size: usize },
    #[error("duplicate world `{0}`")]
    DuplicateWorld(WorldId),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(EventId),
    #[error("`{0}` is not a valid name")]
    InvalidName(String),
    #[error("`{0}` is reserved for a formula constant")]
    ReservedName(String),
    #[error("dangling edge ({from}, {to}) for agent `{agent}` ({size} elements)")]
    DanglingEdge {
        agent: AgentId,
        from: usize,
        to: usize,
        size: usize,
    },
    #[error("no relation given for agent `{0}`")]
    MissingRelation(AgentId),
    #[error("relation for unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("world `{world}` makes unknown proposition `{prop}` true")]
    UnknownFact { world: WorldId, prop: PropId },
    #[error("postcondition of event `{event}` assigns unknown proposition `{prop}`")]
    UnknownPostProp { event: EventId, prop: PropId },
    #[error("postcondition of event `{event}` is F, which is unsupported")]
    BottomPostcondition { event: EventId },
    #[error("precondition of event `{event}`: {error}")]
    Precondition { event: EventId, error: FormulaError },
}
