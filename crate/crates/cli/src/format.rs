//! JSON instance files.
//!
//! ```json
//! {
//!   "props": ["p"],
//!   "agents": ["a"],
//!   "initial": {
//!     "worlds": ["w"],
//!     "valuation": {"w": ["p"]},
//!     "relations": {"a": [["w", "w"]]},
//!     "designated": ["w"]
//!   },
//!   "actions": [{
//!     "events": ["e"],
//!     "relations": {"a": [["e", "e"]]},
//!     "pre": {"e": "T"},
//!     "post": {"e": {"p": false}},
//!     "designated": ["e"]
//!   }],
//!   "query": "B[a] ~p"
//! }
//! ```
//!
//! Propositions missing from a world's valuation list are false. A missing
//! `post` entry, `{}` and `true` all mean no factual change; `false` requests
//! the contradictory postcondition, which validation rejects. Optional
//! `labels` maps attach human-readable labels to worlds or events.
//!
//! Loading resolves names to positions. A reference to an unknown world or
//! event is kept as an issue rather than a hard error, so `validate` can
//! list it next to the structural violations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use dbu_core::formula::parse_formula_syntax;
use dbu_core::{
    Action, AgentId, DbuInstance, EpistemicModel, EpistemicState, Event, EventId, EventModel, Formula, FormulaError,
    Postcondition, PropId, World, WorldId,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub props: Vec<String>,
    pub agents: Vec<String>,
    pub initial: ModelFile,
    #[serde(default)]
    pub actions: Vec<ActionFile>,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<(String, String)>>,
    pub designated: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionFile {
    pub events: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<(String, String)>>,
    pub pre: BTreeMap<String, String>,
    #[serde(default)]
    pub post: BTreeMap<String, PostFile>,
    pub designated: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PostFile {
    Constant(bool),
    Literals(BTreeMap<String, bool>),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed instance file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{location}: {error}")]
    Formula { location: String, error: FormulaError },
    #[error("action {step}: event `{event}` has no precondition")]
    MissingPrecondition { step: usize, event: String },
}

/// A decoded instance plus the unresolved references found while decoding.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: DbuInstance,
    pub issues: Vec<String>,
}

pub fn load_path(path: &Path) -> Result<Loaded, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<Loaded, LoadError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    decode(&file)
}

struct Names {
    index: BTreeMap<String, usize>,
}

impl Names {
    fn new<'a>(names: impl IntoIterator<Item = &'a String>) -> Self {
        let mut index = BTreeMap::new();
        for (i, n) in names.into_iter().enumerate() {
            index.entry(n.clone()).or_insert(i);
        }
        Self { index }
    }

    fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

fn decode_relations(
    relations: &BTreeMap<String, Vec<(String, String)>>,
    names: &Names,
    what: &str,
    site: &str,
    issues: &mut Vec<String>,
) -> BTreeMap<AgentId, dbu_core::kripke::Relation> {
    relations
        .iter()
        .map(|(agent, edges)| {
            let mut rel = BTreeSet::new();
            for (from, to) in edges {
                match (names.get(from), names.get(to)) {
                    (Some(u), Some(v)) => {
                        rel.insert((u, v));
                    }
                    _ => issues.push(format!(
                        "{site}: dangling edge ({from}, {to}) for agent `{agent}`: no such {what}"
                    )),
                }
            }
            (AgentId::new(agent.as_str()), rel)
        })
        .collect()
}

fn decode_designated(designated: &[String], names: &Names, what: &str, site: &str, issues: &mut Vec<String>) -> BTreeSet<usize> {
    designated
        .iter()
        .filter_map(|d| {
            let i = names.get(d);
            if i.is_none() {
                issues.push(format!("{site}: designated {what} `{d}` does not exist"));
            }
            i
        })
        .collect()
}

fn parse(text: &str, top: Option<&PropId>, location: impl FnOnce() -> String) -> Result<Formula, LoadError> {
    parse_formula_syntax(text, top).map_err(|error| LoadError::Formula {
        location: location(),
        error,
    })
}

pub fn decode(file: &InstanceFile) -> Result<Loaded, LoadError> {
    let mut issues = Vec::new();
    let props: BTreeSet<PropId> = file.props.iter().map(|p| PropId::new(p.as_str())).collect();
    let agents: BTreeSet<AgentId> = file.agents.iter().map(|a| AgentId::new(a.as_str())).collect();
    if props.len() != file.props.len() {
        issues.push("props: duplicate proposition".to_owned());
    }
    if agents.len() != file.agents.len() {
        issues.push("agents: duplicate agent".to_owned());
    }
    let top = props.iter().next();

    let m = &file.initial;
    let world_names = Names::new(&m.worlds);
    let mut worlds = Vec::with_capacity(m.worlds.len());
    for name in &m.worlds {
        let id = name.parse::<WorldId>().unwrap_or_else(|e| {
            issues.push(format!("initial state: {e}"));
            WorldId::new(name.as_str())
        });
        let mut world = World::new(id);
        world.label = m.labels.get(name).cloned();
        worlds.push(world);
    }
    for (name, facts) in &m.valuation {
        match world_names.get(name) {
            Some(i) => worlds[i].facts.extend(facts.iter().map(|p| PropId::new(p.as_str()))),
            None => issues.push(format!("initial state: valuation given for unknown world `{name}`")),
        }
    }
    for name in m.labels.keys().filter(|n| world_names.get(n).is_none()) {
        issues.push(format!("initial state: label given for unknown world `{name}`"));
    }
    let relations = decode_relations(&m.relations, &world_names, "world", "initial state", &mut issues);
    let designated = decode_designated(&m.designated, &world_names, "world", "initial state", &mut issues);
    let initial = EpistemicState {
        model: EpistemicModel { worlds, relations },
        designated,
    }
    .canonicalize();

    let mut actions = Vec::with_capacity(file.actions.len());
    for (i, a) in file.actions.iter().enumerate() {
        let step = i + 1;
        let site = format!("action {step}");
        let event_names = Names::new(&a.events);
        let mut events = Vec::with_capacity(a.events.len());
        for name in &a.events {
            let text = a.pre.get(name).ok_or_else(|| LoadError::MissingPrecondition {
                step,
                event: name.clone(),
            })?;
            let pre = parse(text, top, || format!("action {step}, precondition of `{name}`"))?;
            let post = match a.post.get(name) {
                None | Some(PostFile::Constant(true)) => Postcondition::none(),
                Some(PostFile::Constant(false)) => Postcondition::Contradiction,
                Some(PostFile::Literals(m)) => Postcondition::assign(m.iter().map(|(p, &v)| (p.as_str(), v))),
            };
            let mut event = Event::new(EventId::new(name.as_str()), pre, post);
            event.label = a.labels.get(name).cloned();
            events.push(event);
        }
        for name in a.pre.keys().chain(a.post.keys()).chain(a.labels.keys()) {
            if event_names.get(name).is_none() {
                issues.push(format!("{site}: entry for unknown event `{name}`"));
            }
        }
        let relations = decode_relations(&a.relations, &event_names, "event", &site, &mut issues);
        let designated = decode_designated(&a.designated, &event_names, "event", &site, &mut issues);
        actions.push(Action::new(EventModel { events, relations }, designated).canonicalize());
    }

    let query = parse(&file.query, top, || "query".to_owned())?;
    Ok(Loaded {
        instance: DbuInstance {
            props,
            agents,
            initial,
            actions,
            query,
        },
        issues,
    })
}

fn names<T: ToString>(xs: impl IntoIterator<Item = T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

fn encode_relations<F>(relations: &BTreeMap<AgentId, dbu_core::kripke::Relation>, name: F) -> BTreeMap<String, Vec<(String, String)>>
where
    F: Fn(usize) -> String,
{
    relations
        .iter()
        .map(|(a, rel)| (a.to_string(), rel.iter().map(|&(u, v)| (name(u), name(v))).collect()))
        .collect()
}

pub fn encode_state(state: &EpistemicState) -> ModelFile {
    let state = state.clone().canonicalize();
    let model = &state.model;
    let name = |i: usize| model.worlds[i].id.to_string();
    ModelFile {
        worlds: model.worlds.iter().map(|w| w.id.to_string()).collect(),
        valuation: model
            .worlds
            .iter()
            .map(|w| (w.id.to_string(), names(&w.facts)))
            .collect(),
        relations: encode_relations(&model.relations, name),
        designated: state.designated.iter().map(|&d| name(d)).collect(),
        labels: model
            .worlds
            .iter()
            .filter_map(|w| Some((w.id.to_string(), w.label.clone()?)))
            .collect(),
    }
}

pub fn encode_action(action: &Action) -> ActionFile {
    let action = action.clone().canonicalize();
    let events = &action.model.events;
    let name = |i: usize| events[i].id.to_string();
    ActionFile {
        events: events.iter().map(|e| e.id.to_string()).collect(),
        relations: encode_relations(&action.model.relations, name),
        pre: events.iter().map(|e| (e.id.to_string(), e.pre.to_string())).collect(),
        post: events
            .iter()
            .map(|e| {
                let post = match &e.post {
                    Postcondition::Assign(m) => PostFile::Literals(m.iter().map(|(p, &v)| (p.to_string(), v)).collect()),
                    Postcondition::Contradiction => PostFile::Constant(false),
                };
                (e.id.to_string(), post)
            })
            .collect(),
        designated: action.designated.iter().map(|&d| name(d)).collect(),
        labels: events
            .iter()
            .filter_map(|e| Some((e.id.to_string(), e.label.clone()?)))
            .collect(),
    }
}

pub fn encode(inst: &DbuInstance) -> InstanceFile {
    InstanceFile {
        props: names(&inst.props),
        agents: names(&inst.agents),
        initial: encode_state(&inst.initial),
        actions: inst.actions.iter().map(encode_action).collect(),
        query: inst.query.to_string(),
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    // Value's map type is ordered, which sorts struct fields as well.
    let value = serde_json::to_value(value).expect("instance files always serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values always serialize");
    out.push('\n');
    out
}

pub fn save_string(inst: &DbuInstance) -> String {
    to_json(&encode(inst))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "props": ["p"],
        "agents": ["a"],
        "initial": {
            "worlds": ["w", "v"],
            "valuation": {"w": ["p"]},
            "relations": {"a": [["w", "v"], ["v", "v"]]},
            "designated": ["w"]
        },
        "actions": [{
            "events": ["e"],
            "relations": {"a": [["e", "e"]]},
            "pre": {"e": "T"},
            "post": {"e": {"p": false}},
            "designated": ["e"]
        }],
        "query": "B[a] ~p"
    }"#;

    #[test]
    fn decodes_and_canonicalizes() {
        let loaded = load_str(SMALL).unwrap();
        assert!(loaded.issues.is_empty());
        let inst = loaded.instance;
        assert!(inst.validate().is_empty());
        // worlds are sorted by identifier
        assert_eq!(inst.initial.model.worlds[0].id, WorldId::new("v"));
        assert_eq!(inst.initial.designated, [1].into_iter().collect());
        assert_eq!(inst.actions[0].model.events[0].post, Postcondition::assign([("p", false)]));
        assert_eq!(inst.actions[0].model.events[0].pre, Formula::top("p"));
    }

    #[test]
    fn round_trip_is_a_fixed_point() {
        let inst = load_str(SMALL).unwrap().instance;
        let saved = save_string(&inst);
        let again = load_str(&saved).unwrap().instance;
        assert_eq!(again, inst);
        assert_eq!(save_string(&again), saved);
    }

    #[test]
    fn keys_are_sorted() {
        let saved = save_string(&load_str(SMALL).unwrap().instance);
        let actions = saved.find("\"actions\"").unwrap();
        let agents = saved.find("\"agents\"").unwrap();
        let query = saved.find("\"query\"").unwrap();
        assert!(actions < agents && agents < query);
        assert!(saved.ends_with("}\n"));
        assert!(!saved.contains('\r'));
    }

    #[test]
    fn unknown_references_become_issues() {
        let text = SMALL.replace(r#"["v", "v"]"#, r#"["v", "u"]"#).replace(r#""designated": ["e"]"#, r#""designated": ["f"]"#);
        let loaded = load_str(&text).unwrap();
        assert_eq!(loaded.issues.len(), 2, "{:?}", loaded.issues);
        assert!(loaded.issues[0].contains("dangling edge (v, u)"));
        assert!(loaded.issues[1].contains("designated event `f`"));
    }

    #[test]
    fn formula_syntax_is_a_hard_error() {
        let text = SMALL.replace("B[a] ~p", "B[a ~p");
        assert!(matches!(load_str(&text), Err(LoadError::Formula { .. })));
        let text = SMALL.replace(r#""pre": {"e": "T"}"#, r#""pre": {}"#);
        assert!(matches!(load_str(&text), Err(LoadError::MissingPrecondition { step: 1, .. })));
        assert!(matches!(load_str("{"), Err(LoadError::Json(_))));
    }

    #[test]
    fn post_constants() {
        let text = SMALL.replace(r#"{"p": false}"#, "false");
        let inst = load_str(&text).unwrap().instance;
        assert_eq!(inst.actions[0].model.events[0].post, Postcondition::Contradiction);
        assert!(!inst.validate().is_empty());
        let text = SMALL.replace(r#"{"p": false}"#, "true");
        let inst = load_str(&text).unwrap().instance;
        assert!(inst.actions[0].model.events[0].post.is_trivial());
    }
}
