//! Quantified Boolean formulas, a brute-force evaluator for them, and the
//! polynomial-time translation of a QBF into a DBU instance that is true
//! exactly when the QBF is.
//!
//! The translation builds an initial state with a chain of "bottom" worlds
//! `w0 ... wm` joined by agent `a`, and one `y`-world `vi` hanging off each
//! `wi` for agent `i`. Action `i` splits every world into a copy that keeps
//! `x_i` and a copy that drops it, so the final model holds one
//! `a`-equivalence class of bottom worlds per truth assignment. Quantifier
//! `Q_i` becomes `B[i]` or `D[i]`, which jumps between classes that differ
//! only on `x_i`, and `x_i` itself becomes `D[a] D[i] y`.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::engine::{apply_sequence_inspect, extract_parameters, world_bound, DbuInstance, EngineError, ParameterVector};
use crate::events::{Action, Event, EventModel, Postcondition};
use crate::formula::{AgentId, Formula, PropId};
use crate::kripke::{evaluate_pointed, EpistemicModel, EpistemicState, Relation, World, WorldId};

/// Largest number of variables [`qbf_brute_force`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    fn symbol(self) -> char {
        match self {
            Quantifier::Forall => 'A',
            Quantifier::Exists => 'E',
        }
    }
}

/// Propositional matrix over variables `x1 ... xm` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolExpr {
    Var(usize),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(i: usize) -> Self {
        BoolExpr::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(l), Box::new(r))
    }

    /// Evaluates under `assignment`, where `assignment[i - 1]` is the value of `xi`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            BoolExpr::Var(i) => assignment[i - 1],
            BoolExpr::Not(e) => !e.eval(assignment),
            BoolExpr::And(l, r) => l.eval(assignment) && r.eval(assignment),
            BoolExpr::Or(l, r) => l.eval(assignment) || r.eval(assignment),
        }
    }

    fn unbound_var(&self, m: usize) -> Option<usize> {
        match self {
            BoolExpr::Var(i) => (*i == 0 || *i > m).then_some(*i),
            BoolExpr::Not(e) => e.unbound_var(m),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => l.unbound_var(m).or_else(|| r.unbound_var(m)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            _ => 3,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &BoolExpr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Var(i) => write!(f, "x{i}"),
            BoolExpr::Not(e) => {
                f.write_str("~")?;
                write_operand(f, e, e.precedence() < 3)
            }
            BoolExpr::And(l, r) => {
                write_operand(f, l, l.precedence() < 2)?;
                f.write_str(" & ")?;
                write_operand(f, r, r.precedence() <= 2)
            }
            BoolExpr::Or(l, r) => {
                write_operand(f, l, l.precedence() < 1)?;
                f.write_str(" | ")?;
                write_operand(f, r, r.precedence() <= 1)
            }
        }
    }
}

/// A literal `xi` or `~xi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    fn expr(self) -> BoolExpr {
        if self.positive {
            BoolExpr::Var(self.var)
        } else {
            BoolExpr::not(BoolExpr::Var(self.var))
        }
    }
}

/// `Q1 x1 ... Qm xm . matrix`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Qbf {
    quantifiers: Vec<Quantifier>,
    matrix: BoolExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("syntax error at byte {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: &'static str,
        found: String,
    },
    #[error("variable x{0} is not bound by the prefix")]
    Unbound(usize),
    #[error("variable x{0} is bound twice")]
    Duplicate(usize),
    #[error("prefix must bind x1, x2, ... in order; found x{found} where x{expected} was expected")]
    OutOfOrder { expected: usize, found: usize },
    #[error("{vars} variables exceed the brute-force limit of {limit}")]
    TooLarge { vars: usize, limit: usize },
}

impl Qbf {
    /// `quantifiers[i]` binds `x(i+1)`.
    pub fn new(quantifiers: Vec<Quantifier>, matrix: BoolExpr) -> Result<Self, QbfError> {
        if let Some(i) = matrix.unbound_var(quantifiers.len()) {
            return Err(QbfError::Unbound(i));
        }
        Ok(Self { quantifiers, matrix })
    }

    /// Conjunction of disjunctive clauses, folded left.
    pub fn cnf(quantifiers: Vec<Quantifier>, clauses: &[Vec<Literal>]) -> Result<Self, QbfError> {
        let clause = |c: &Vec<Literal>| c.iter().map(|l| l.expr()).reduce(BoolExpr::or);
        let matrix = clauses
            .iter()
            .filter_map(clause)
            .reduce(BoolExpr::and)
            .ok_or(QbfError::Syntax {
                position: 0,
                expected: "at least one nonempty clause",
                found: "an empty matrix".to_owned(),
            })?;
        Qbf::new(quantifiers, matrix)
    }

    pub fn num_vars(&self) -> usize {
        self.quantifiers.len()
    }

    pub fn quantifiers(&self) -> &[Quantifier] {
        &self.quantifiers
    }

    /// `(quantifier, variable index)` pairs, 1-based.
    pub fn prefix(&self) -> impl DoubleEndedIterator<Item = (Quantifier, usize)> + '_ {
        self.quantifiers.iter().enumerate().map(|(i, &q)| (q, i + 1))
    }

    pub fn matrix(&self) -> &BoolExpr {
        &self.matrix
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, i) in self.prefix() {
            write!(f, "{} x{i} ", q.symbol())?;
        }
        write!(f, ". {}", self.matrix)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum QTok {
    Quant(Quantifier),
    Var(usize),
    Dot,
    Tilde,
    Amp,
    Pipe,
    LParen,
    RParen,
}

fn lex_qbf(text: &str) -> Result<Vec<(usize, QTok)>, QbfError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let tok = match bytes[i] {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'E' => QTok::Quant(Quantifier::Exists),
            b'A' => QTok::Quant(Quantifier::Forall),
            b'.' => QTok::Dot,
            b'~' => QTok::Tilde,
            b'&' => QTok::Amp,
            b'|' => QTok::Pipe,
            b'(' => QTok::LParen,
            b')' => QTok::RParen,
            b'x' => {
                let start = i;
                i += 1;
                let digits = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[digits..i].parse::<usize>().map_err(|_| QbfError::Syntax {
                    position: digits,
                    expected: "a variable index",
                    found: describe(text, digits),
                })?;
                out.push((start, QTok::Var(n)));
                continue;
            }
            _ => {
                return Err(QbfError::Syntax {
                    position: i,
                    expected: "a quantifier, variable, operator or parenthesis",
                    found: describe(text, i),
                })
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

fn describe(text: &str, at: usize) -> String {
    match text[at..].chars().next() {
        Some(c) => format!("`{c}`"),
        None => "end of input".to_owned(),
    }
}

struct QbfParser {
    tokens: Vec<(usize, QTok)>,
    pos: usize,
    end: usize,
    bound: usize,
}

impl QbfParser {
    fn peek(&self) -> Option<&QTok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn error(&self, expected: &'static str) -> QbfError {
        let (position, found) = match self.tokens.get(self.pos) {
            Some((p, t)) => (*p, format!("{t:?}")),
            None => (self.end, "end of input".to_owned()),
        };
        QbfError::Syntax {
            position,
            expected,
            found,
        }
    }

    fn or(&mut self) -> Result<BoolExpr, QbfError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&QTok::Pipe) {
            self.pos += 1;
            acc = BoolExpr::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<BoolExpr, QbfError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&QTok::Amp) {
            self.pos += 1;
            acc = BoolExpr::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BoolExpr, QbfError> {
        match self.peek().cloned() {
            Some(QTok::Tilde) => {
                self.pos += 1;
                Ok(BoolExpr::not(self.unary()?))
            }
            Some(QTok::Var(i)) => {
                if i == 0 || i > self.bound {
                    return Err(QbfError::Unbound(i));
                }
                self.pos += 1;
                Ok(BoolExpr::Var(i))
            }
            Some(QTok::LParen) => {
                self.pos += 1;
                let e = self.or()?;
                if self.peek() != Some(&QTok::RParen) {
                    return Err(self.error("`)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(self.error("a variable, `~` or `(`")),
        }
    }
}

/// Parses `(E|A) x1 (E|A) x2 ... . matrix`.
pub fn parse_qbf(text: &str) -> Result<Qbf, QbfError> {
    let mut p = QbfParser {
        tokens: lex_qbf(text)?,
        pos: 0,
        end: text.len(),
        bound: 0,
    };
    let mut quantifiers = Vec::new();
    let mut seen = BTreeSet::new();
    while let Some(QTok::Quant(q)) = p.peek().cloned() {
        p.pos += 1;
        let Some(QTok::Var(i)) = p.peek().cloned() else {
            return Err(p.error("a variable after the quantifier"));
        };
        if !seen.insert(i) {
            return Err(QbfError::Duplicate(i));
        }
        let expected = quantifiers.len() + 1;
        if i != expected {
            return Err(QbfError::OutOfOrder { expected, found: i });
        }
        p.pos += 1;
        quantifiers.push(q);
    }
    if quantifiers.is_empty() {
        return Err(p.error("a quantifier"));
    }
    if p.peek() != Some(&QTok::Dot) {
        return Err(p.error("`.` or another quantifier"));
    }
    p.pos += 1;
    p.bound = quantifiers.len();
    let matrix = p.or()?;
    if p.peek().is_some() {
        return Err(p.error("`&`, `|` or end of input"));
    }
    Qbf::new(quantifiers, matrix)
}

/// Truth of `q` by expanding every quantifier over both values.
pub fn qbf_brute_force(q: &Qbf) -> Result<bool, QbfError> {
    if q.num_vars() > BRUTE_FORCE_LIMIT {
        return Err(QbfError::TooLarge {
            vars: q.num_vars(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    fn go(q: &Qbf, assignment: &mut Vec<bool>) -> bool {
        let Some(&quant) = q.quantifiers.get(assignment.len()) else {
            return q.matrix.eval(assignment);
        };
        let mut branch = |value| {
            assignment.push(value);
            let r = go(q, assignment);
            assignment.pop();
            r
        };
        match quant {
            Quantifier::Forall => branch(false) && branch(true),
            Quantifier::Exists => branch(false) || branch(true),
        }
    }
    Ok(go(q, &mut Vec::with_capacity(q.num_vars())))
}

/// The agent that shares every bottom world of an assignment group.
pub const GROUP_AGENT: &str = "a";
pub const MARKER_PROP: &str = "y";

pub fn variable_agent(i: usize) -> AgentId {
    AgentId::new(format!("{i}"))
}

/// Bottom worlds descend from the chain `w0 ... wm`; the rest descend from
/// the `y`-worlds `v1 ... vm`.
pub fn is_bottom_world(id: &WorldId) -> bool {
    id.base().starts_with('w')
}

/// Pairs related by the reflexive, symmetric, transitive closure of `edges`.
pub fn equivalence_closure(size: usize, edges: &[(usize, usize)]) -> Relation {
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in 0..size {
        let r = find(&mut parent, x);
        classes.entry(r).or_default().push(x);
    }
    classes
        .values()
        .flat_map(|class| class.iter().flat_map(move |&u| class.iter().map(move |&v| (u, v))))
        .collect()
}

fn translate_matrix(e: &BoolExpr) -> Formula {
    match e {
        BoolExpr::Var(i) => Formula::possible(
            GROUP_AGENT,
            Formula::possible(variable_agent(*i), Formula::prop(MARKER_PROP)),
        ),
        BoolExpr::Not(e) => Formula::not(translate_matrix(e)),
        BoolExpr::And(l, r) => Formula::and(translate_matrix(l), translate_matrix(r)),
        BoolExpr::Or(l, r) => Formula::or(translate_matrix(l), translate_matrix(r)),
    }
}

/// The query `[Q1] ... [Qm] [matrix]`.
pub fn translate_qbf(q: &Qbf) -> Formula {
    q.prefix().rev().fold(translate_matrix(&q.matrix), |body, (quant, i)| match quant {
        Quantifier::Forall => Formula::believes(variable_agent(i), body),
        Quantifier::Exists => Formula::possible(variable_agent(i), body),
    })
}

/// The gadget precondition `~D[i] y | y`.
pub fn gadget_precondition(i: usize) -> Formula {
    let y = || Formula::prop(MARKER_PROP);
    Formula::or(Formula::not(Formula::possible(variable_agent(i), y())), y())
}

fn gadget_action(i: usize, agents: &BTreeSet<AgentId>) -> Action {
    let me = variable_agent(i);
    let relations = agents
        .iter()
        .map(|a| {
            let drawn: &[(usize, usize)] = if *a == me { &[(0, 1)] } else { &[] };
            (a.clone(), equivalence_closure(2, drawn))
        })
        .collect();
    let events = vec![
        Event::new("e1", Formula::top(MARKER_PROP), Postcondition::none()),
        Event::new("e2", gadget_precondition(i), Postcondition::none()),
    ];
    Action::new(EventModel { events, relations }, [0])
}

/// Builds the DBU instance that is true exactly when `q` is.
pub fn reduce_tqbf_to_dbu(q: &Qbf) -> DbuInstance {
    let m = q.num_vars();
    let props: BTreeSet<PropId> = [PropId::new(MARKER_PROP)].into_iter().collect();
    let agents: BTreeSet<AgentId> = core::iter::once(AgentId::new(GROUP_AGENT))
        .chain((1..=m).map(variable_agent))
        .collect();

    // w_j at index j, v_i at index m + i
    let mut worlds: Vec<World> = (0..=m).map(|j| World::new(WorldId::new(format!("w{j}")))).collect();
    worlds.extend((1..=m).map(|i| World::new(WorldId::new(format!("v{i}"))).with_facts([MARKER_PROP])));
    let size = worlds.len();

    let relations = agents
        .iter()
        .map(|a| {
            let drawn: Vec<(usize, usize)> = if a.as_str() == GROUP_AGENT {
                (1..=m).map(|j| (j - 1, j)).collect()
            } else {
                let i: usize = a.as_str().parse().expect("variable agents are numbered");
                vec![(i, m + i)]
            };
            (a.clone(), equivalence_closure(size, &drawn))
        })
        .collect();
    let initial = EpistemicState::new(EpistemicModel { worlds, relations }, [0]).canonicalize();
    let actions = (1..=m).map(|i| gadget_action(i, &agents)).collect();

    DbuInstance {
        props,
        agents,
        initial,
        actions,
        query: translate_qbf(q),
    }
}

/// Outcome of checking one QBF against its reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessRecord {
    pub qbf: Qbf,
    pub oracle: bool,
    pub dbu: bool,
    pub params: ParameterVector,
    pub worlds_final: usize,
    pub bound: u128,
    /// `|W_i| <= |W_0| * e^i` held after every update.
    pub within_bound: bool,
}

impl HarnessRecord {
    pub fn agree(&self) -> bool {
        self.oracle == self.dbu
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HarnessReport {
    pub records: Vec<HarnessRecord>,
}

impl HarnessReport {
    pub fn disagreements(&self) -> usize {
        self.records.iter().filter(|r| !r.agree()).count()
    }

    pub fn bound_failures(&self) -> usize {
        self.records.iter().filter(|r| !r.within_bound).count()
    }

    pub fn is_clean(&self) -> bool {
        self.disagreements() == 0 && self.bound_failures() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("instance {index} ({qbf}): {source}")]
    Engine {
        index: usize,
        qbf: String,
        source: EngineError,
    },
    #[error("instance {index}: {source}")]
    Qbf { index: usize, source: QbfError },
}

pub fn check_qbf(q: &Qbf) -> Result<HarnessRecord, EngineError> {
    let inst = reduce_tqbf_to_dbu(q);
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(EngineError::Invalid(violations));
    }
    let params = extract_parameters(&inst);
    let w0 = inst.initial.model.len();
    let mut within_bound = true;
    let last = apply_sequence_inspect(&inst.initial, &inst.actions, |i, s| {
        within_bound &= s.model.len() as u128 <= world_bound(w0, params.e, i);
    })?;
    let dbu = evaluate_pointed(&last, &inst.query)?;
    // brute force is only reached for well-formed, in-range formulas
    let oracle = qbf_brute_force(q).map_err(|_| EngineError::Invalid(Vec::new()))?;
    Ok(HarnessRecord {
        qbf: q.clone(),
        oracle,
        dbu,
        params,
        worlds_final: last.model.len(),
        bound: world_bound(w0, params.e, params.u),
        within_bound,
    })
}

/// Compares the brute-force verdict with the DBU verdict for every QBF.
pub fn equivalence_harness(qbfs: &[Qbf]) -> Result<HarnessReport, HarnessError> {
    let mut records = Vec::with_capacity(qbfs.len());
    for (index, q) in qbfs.iter().enumerate() {
        if q.num_vars() > BRUTE_FORCE_LIMIT {
            return Err(HarnessError::Qbf {
                index,
                source: QbfError::TooLarge {
                    vars: q.num_vars(),
                    limit: BRUTE_FORCE_LIMIT,
                },
            });
        }
        let record = check_qbf(q).map_err(|source| HarnessError::Engine {
            index,
            qbf: format!("{q}"),
            source,
        })?;
        records.push(record);
    }
    Ok(HarnessReport { records })
}

fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Every distinct clause of 1 to `max_width` literals over `x1 ... xm`.
pub fn all_clauses(m: usize, max_width: usize) -> Vec<Vec<Literal>> {
    let literals: Vec<Literal> = (1..=m)
        .flat_map(|var| [true, false].map(|positive| Literal { var, positive }))
        .collect();
    (1..=max_width).flat_map(|k| combinations(&literals, k)).collect()
}

/// All quantifier prefixes of length `m`, in binary order with `A` before `E`.
pub fn all_prefixes(m: usize) -> Vec<Vec<Quantifier>> {
    (0..1usize << m)
        .map(|bits| {
            (0..m)
                .map(|i| {
                    if bits >> (m - 1 - i) & 1 == 0 {
                        Quantifier::Forall
                    } else {
                        Quantifier::Exists
                    }
                })
                .collect()
        })
        .collect()
}

/// Every CNF QBF with `1..=max_m` variables and `1..=max_clauses` distinct
/// clauses of width at most `max_width`, ordered by `m`, then matrix, then prefix.
pub fn exhaustive_suite(max_m: usize, max_clauses: usize, max_width: usize) -> Vec<Qbf> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        let clauses = all_clauses(m, max_width);
        let prefixes = all_prefixes(m);
        for k in 1..=max_clauses {
            for matrix in combinations(&clauses, k) {
                for prefix in &prefixes {
                    out.push(Qbf::cnf(prefix.clone(), &matrix).expect("variables are in range"));
                }
            }
        }
    }
    out
}
