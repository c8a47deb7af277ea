//! Pointed epistemic models, truth of belief formulas, and frame checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::events::EventId;
use crate::formula::{is_name_token, AgentId, Formula, PropId, RESERVED_NAMES};
use crate::violation::Violation;

/// One agent's accessibility relation as explicit `(from, to)` index pairs.
pub type Relation = BTreeSet<(usize, usize)>;

/// Identifies a world. Worlds of an initial model carry only a base name;
/// worlds produced by product update also carry the events they were paired
/// with, oldest first. Displayed as `base.e1.e2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId {
    base: String,
    trail: Vec<EventId>,
}

impl WorldId {
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into(),
            trail: Vec::new(),
        }
    }

    /// The world `(self, event)` of a product.
    pub fn paired(&self, event: &EventId) -> Self {
        let mut trail = self.trail.clone();
        trail.push(event.clone());
        Self {
            base: self.base.clone(),
            trail,
        }
    }

    /// Name of the originating world in the initial model.
    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn trail(&self) -> &[EventId] {
        &self.trail
    }
}

impl fmt::Display for WorldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        for e in &self.trail {
            write!(f, ".{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("`{0}` is not a world identifier")]
pub struct WorldIdError(pub String);

impl FromStr for WorldId {
    type Err = WorldIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        let base = parts.next().unwrap_or_default();
        if !is_name_token(base) {
            return Err(WorldIdError(s.into()));
        }
        let mut id = WorldId::new(base);
        for part in parts {
            if !is_name_token(part) {
                return Err(WorldIdError(s.into()));
            }
            id.trail.push(EventId::new(part));
        }
        Ok(id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub id: WorldId,
    pub label: Option<String>,
    /// Propositions true at this world; all others are false.
    pub facts: BTreeSet<PropId>,
}

impl World {
    pub fn new(id: WorldId) -> Self {
        Self {
            id,
            label: None,
            facts: BTreeSet::new(),
        }
    }

    pub fn with_facts<I, P>(mut self, facts: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: Into<PropId>,
    {
        self.facts = facts.into_iter().map(Into::into).collect();
        self
    }
}

/// A Kripke structure `(W, R, V)`. Worlds are addressed by position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EpistemicModel {
    pub worlds: Vec<World>,
    pub relations: BTreeMap<AgentId, Relation>,
}

impl EpistemicModel {
    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn position(&self, id: &WorldId) -> Option<usize> {
        self.worlds.iter().position(|w| &w.id == id)
    }

    pub fn holds(&self, world: usize, prop: &PropId) -> bool {
        self.worlds[world].facts.contains(prop)
    }

    /// Successors of `world` under `agent`'s relation, in index order.
    pub fn successors<'a>(&'a self, agent: &AgentId, world: usize) -> impl Iterator<Item = usize> + 'a {
        self.relations
            .get(agent)
            .into_iter()
            .flat_map(move |r| r.range((world, 0)..=(world, usize::MAX)).map(|&(_, v)| v))
    }

    pub fn frame_report(&self) -> FrameReport {
        FrameReport::from_relations(self.len(), &self.relations)
    }
}

/// A pointed model `((W, R, V), W_d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpistemicState {
    pub model: EpistemicModel,
    pub designated: BTreeSet<usize>,
}

impl EpistemicState {
    pub fn new(model: EpistemicModel, designated: impl IntoIterator<Item = usize>) -> Self {
        Self {
            model,
            designated: designated.into_iter().collect(),
        }
    }

    pub fn is_single_pointed(&self) -> bool {
        self.designated.len() == 1
    }

    pub fn designated_ids(&self) -> impl Iterator<Item = &WorldId> + '_ {
        self.designated.iter().map(|&w| &self.model.worlds[w].id)
    }

    /// Reorders worlds by identifier, remapping relations and the designated set.
    pub fn canonicalize(self) -> Self {
        let mut order: Vec<usize> = (0..self.model.len()).collect();
        order.sort_by(|&a, &b| self.model.worlds[a].id.cmp(&self.model.worlds[b].id));
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self;
        }
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let remap = |i: usize| new_index.get(i).copied().unwrap_or(i);
        let mut old_worlds: Vec<Option<World>> = self.model.worlds.into_iter().map(Some).collect();
        let worlds = order.iter().map(|&o| old_worlds[o].take().expect("permutation")).collect();
        let relations = self
            .model
            .relations
            .into_iter()
            .map(|(a, r)| (a, r.into_iter().map(|(u, v)| (remap(u), remap(v))).collect()))
            .collect();
        let designated = self.designated.into_iter().map(remap).collect();
        EpistemicState {
            model: EpistemicModel { worlds, relations },
            designated,
        }
    }
}

/// Checks the model and pointed-state invariants against the vocabulary.
pub fn validate_state(
    state: &EpistemicState,
    agents: &BTreeSet<AgentId>,
    props: &BTreeSet<PropId>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let model = &state.model;
    let n = model.len();
    if n == 0 {
        out.push(Violation::NoWorlds);
    }
    let mut seen = BTreeSet::new();
    for w in &model.worlds {
        if !is_name_token(w.id.base()) || w.id.trail().iter().any(|e| !is_name_token(e.as_str())) {
            out.push(Violation::InvalidName(alloc::format!("{}", w.id)));
        }
        if !seen.insert(&w.id) {
            out.push(Violation::DuplicateWorld(w.id.clone()));
        }
        for p in &w.facts {
            if !props.contains(p) {
                out.push(Violation::UnknownFact {
                    world: w.id.clone(),
                    prop: p.clone(),
                });
            }
        }
    }
    check_relations(&model.relations, n, agents, &mut out);
    check_designated(&state.designated, n, &mut out);
    out
}

pub(crate) fn check_relations(
    relations: &BTreeMap<AgentId, Relation>,
    size: usize,
    agents: &BTreeSet<AgentId>,
    out: &mut Vec<Violation>,
) {
    for a in agents {
        if !relations.contains_key(a) {
            out.push(Violation::MissingRelation(a.clone()));
        }
    }
    for (a, rel) in relations {
        if !agents.contains(a) {
            out.push(Violation::UnknownAgent(a.clone()));
        }
        for &(from, to) in rel {
            if from >= size || to >= size {
                out.push(Violation::DanglingEdge {
                    agent: a.clone(),
                    from,
                    to,
                    size,
                });
            }
        }
    }
}

pub(crate) fn check_designated(designated: &BTreeSet<usize>, size: usize, out: &mut Vec<Violation>) {
    if designated.is_empty() {
        out.push(Violation::EmptyDesignated);
    }
    for &d in designated {
        if d >= size {
            out.push(Violation::DesignatedOutOfRange { index: d, size });
        }
    }
}

/// Validates agent and proposition names themselves.
pub fn validate_vocabulary(agents: &BTreeSet<AgentId>, props: &BTreeSet<PropId>) -> Vec<Violation> {
    let names = agents.iter().map(AgentId::as_str).chain(props.iter().map(PropId::as_str));
    let mut out = Vec::new();
    for name in names {
        if !is_name_token(name) {
            out.push(Violation::InvalidName(name.into()));
        }
    }
    for p in props {
        if RESERVED_NAMES.contains(&p.as_str()) {
            out.push(Violation::ReservedName(p.as_str().into()));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RelationFlags {
    pub serial: bool,
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    pub euclidean: bool,
}

impl RelationFlags {
    /// Checks each property directly from its definition.
    pub fn of(size: usize, rel: &Relation) -> Self {
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); size];
        for &(u, v) in rel {
            if u < size && v < size {
                succ[u].insert(v);
            }
        }
        let serial = succ.iter().all(|s| !s.is_empty());
        let reflexive = (0..size).all(|w| succ[w].contains(&w));
        let symmetric = rel.iter().all(|&(u, v)| rel.contains(&(v, u)));
        // (u,v) and (v,w) imply (u,w)
        let transitive = rel
            .iter()
            .filter(|&&(_, v)| v < size)
            .all(|&(u, v)| succ[v].iter().all(|w| rel.contains(&(u, *w))));
        // (u,v) and (u,w) imply (v,w)
        let euclidean = succ
            .iter()
            .all(|s| s.iter().all(|&v| s.iter().all(|&w| rel.contains(&(v, w)))));
        Self {
            serial,
            reflexive,
            symmetric,
            transitive,
            euclidean,
        }
    }

    pub fn is_kd45(&self) -> bool {
        self.serial && self.transitive && self.euclidean
    }

    pub fn is_s5(&self) -> bool {
        self.reflexive && self.symmetric && self.transitive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FrameClass {
    /// No frame constraints certified.
    K,
    KD45,
    S5,
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameClass::K => "K",
            FrameClass::KD45 => "KD45",
            FrameClass::S5 => "S5",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameReport {
    pub agents: BTreeMap<AgentId, RelationFlags>,
    pub kd45: bool,
    pub s5: bool,
}

impl FrameReport {
    pub fn from_relations(size: usize, relations: &BTreeMap<AgentId, Relation>) -> Self {
        let agents: BTreeMap<_, _> = relations
            .iter()
            .map(|(a, r)| (a.clone(), RelationFlags::of(size, r)))
            .collect();
        let s5 = agents.values().all(RelationFlags::is_s5);
        let kd45 = agents.values().all(RelationFlags::is_kd45);
        // An equivalence relation on a nonempty domain is serial and euclidean.
        debug_assert!(!s5 || size == 0 || kd45);
        Self { agents, kd45, s5 }
    }

    pub fn class(&self) -> FrameClass {
        if self.s5 {
            FrameClass::S5
        } else if self.kd45 {
            FrameClass::KD45
        } else {
            FrameClass::K
        }
    }
}

/// Computes `frame_report` for a model.
pub fn frame_report(model: &EpistemicModel) -> FrameReport {
    model.frame_report()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("world index {0} is not in the model")]
    UnknownWorld(usize),
    #[error("agent `{0}` has no relation in the model")]
    UnknownAgent(AgentId),
}

/// Global model checker: computes the set of worlds where a formula holds,
/// bottom-up over the formula tree.
pub struct Evaluator<'m> {
    model: &'m EpistemicModel,
    successors: BTreeMap<&'m AgentId, Vec<Vec<usize>>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m EpistemicModel) -> Self {
        let n = model.len();
        let successors = model
            .relations
            .iter()
            .map(|(a, rel)| {
                let mut succ = vec![Vec::new(); n];
                for &(u, v) in rel {
                    if u < n && v < n {
                        succ[u].push(v);
                    }
                }
                (a, succ)
            })
            .collect();
        Self { model, successors }
    }

    pub fn model(&self) -> &'m EpistemicModel {
        self.model
    }

    /// Truth value of `f` at every world, by index.
    pub fn truth_set(&self, f: &Formula) -> Result<Vec<bool>, EvalError> {
        Ok(match f {
            Formula::Prop(p) => self.model.worlds.iter().map(|w| w.facts.contains(p)).collect(),
            Formula::Not(g) => {
                let mut t = self.truth_set(g)?;
                t.iter_mut().for_each(|b| *b = !*b);
                t
            }
            Formula::And(l, r) => {
                let mut t = self.truth_set(l)?;
                let r = self.truth_set(r)?;
                t.iter_mut().zip(r).for_each(|(a, b)| *a = *a && b);
                t
            }
            Formula::Believes(a, g) => {
                let succ = self
                    .successors
                    .get(a)
                    .ok_or_else(|| EvalError::UnknownAgent(a.clone()))?;
                let inner = self.truth_set(g)?;
                succ.iter().map(|vs| vs.iter().all(|&v| inner[v])).collect()
            }
        })
    }

    pub fn holds_at(&self, world: usize, f: &Formula) -> Result<bool, EvalError> {
        if world >= self.model.len() {
            return Err(EvalError::UnknownWorld(world));
        }
        Ok(self.truth_set(f)?[world])
    }

    /// True iff `f` holds at every world in `worlds`.
    pub fn holds_everywhere<'w>(
        &self,
        worlds: impl IntoIterator<Item = &'w usize>,
        f: &Formula,
    ) -> Result<bool, EvalError> {
        let truth = self.truth_set(f)?;
        let mut all = true;
        for &w in worlds {
            all &= *truth.get(w).ok_or(EvalError::UnknownWorld(w))?;
        }
        Ok(all)
    }
}

/// `M, w |= f`.
pub fn evaluate(model: &EpistemicModel, world: usize, f: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(model).holds_at(world, f)
}

/// `(M, W_d) |= f`: `f` holds at every designated world.
pub fn evaluate_pointed(state: &EpistemicState, f: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(&state.model).holds_everywhere(&state.designated, f)
}
