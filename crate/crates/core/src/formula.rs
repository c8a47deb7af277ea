//! The belief language: propositions, negation, conjunction and `B_a`.
//!
//! Only the four core connectives exist as AST nodes. Disjunction,
//! implication, the diamond `D[a]` and the constants `T`/`F` are accepted by
//! the parser and expanded on the spot, so every metric and every truth
//! check sees the same core tree.
//!
//! Concrete syntax (EBNF):
//!
//! ```text
//! formula  = implies ;
//! implies  = or , [ "->" , implies ] ;              (* right associative *)
//! or       = and , { "|" , and } ;
//! and      = unary , { "&" , unary } ;
//! unary    = "~" , unary
//!          | "B" , "[" , name , "]" , unary
//!          | "D" , "[" , name , "]" , unary
//!          | atom ;
//! atom     = "T" | "F" | name | "(" , formula , ")" ;
//! name     = ( letter | digit | "_" ) , { letter | digit | "_" } ;
//! ```
//!
//! `T` expands to `p | ~p` for the lexicographically first proposition `p`
//! of the vocabulary; `F` is `~T`.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Returns true if `name` is a nonempty run of ASCII letters, digits and `_`.
pub fn is_name_token(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Names that the formula grammar reserves for the constants.
pub const RESERVED_NAMES: [&str; 2] = ["T", "F"];

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(::alloc::string::String);

        impl $name {
            pub fn new(name: impl Into<::alloc::string::String>) -> Self {
                Self(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl ::core::fmt::Display for $name {
            fn fmt(&self, f: &mut ::core::fmt::Formatter<'_>) -> ::core::fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(name: &str) -> Self {
                Self(::alloc::borrow::ToOwned::to_owned(name))
            }
        }

        impl From<::alloc::string::String> for $name {
            fn from(name: ::alloc::string::String) -> Self {
                Self(name)
            }
        }
    };
}

pub(crate) use name_type;

name_type!(
    /// An agent name such as `a` or `1`.
    AgentId
);
name_type!(
    /// A proposition name.
    PropId
);

/// A formula of the core belief language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Prop(PropId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Believes(AgentId, Box<Formula>),
}

impl Formula {
    pub fn prop(p: impl Into<PropId>) -> Self {
        Formula::Prop(p.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn believes(agent: impl Into<AgentId>, f: Formula) -> Self {
        Formula::Believes(agent.into(), Box::new(f))
    }

    /// `l | r`, expanded to `~(~l & ~r)`.
    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(l), Formula::not(r)))
    }

    /// `l -> r`, expanded to `~l | r`.
    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::or(Formula::not(l), r)
    }

    /// The diamond `D[a] f`, expanded to `~B[a] ~f`.
    pub fn possible(agent: impl Into<AgentId>, f: Formula) -> Self {
        Formula::not(Formula::believes(agent, Formula::not(f)))
    }

    /// `T`, expanded to `p | ~p`.
    pub fn top(p: impl Into<PropId>) -> Self {
        let p = p.into();
        Formula::or(Formula::Prop(p.clone()), Formula::not(Formula::Prop(p)))
    }

    /// `F`, expanded to `~T`.
    pub fn bottom(p: impl Into<PropId>) -> Self {
        Formula::not(Formula::top(p))
    }

    /// Maximum nesting of belief operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Prop(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Believes(_, f) => 1 + f.modal_depth(),
        }
    }

    /// Number of proposition occurrences plus connectives.
    pub fn size(&self) -> usize {
        match self {
            Formula::Prop(_) => 1,
            Formula::Not(f) | Formula::Believes(_, f) => 1 + f.size(),
            Formula::And(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Visits every agent and proposition mentioned in the formula.
    pub fn symbols<'a>(&'a self, agents: &mut BTreeSet<&'a AgentId>, props: &mut BTreeSet<&'a PropId>) {
        match self {
            Formula::Prop(p) => {
                props.insert(p);
            }
            Formula::Not(f) => f.symbols(agents, props),
            Formula::And(l, r) => {
                l.symbols(agents, props);
                r.symbols(agents, props);
            }
            Formula::Believes(a, f) => {
                agents.insert(a);
                f.symbols(agents, props);
            }
        }
    }

    /// Checks that every agent and proposition is drawn from the given sets.
    pub fn check_symbols(
        &self,
        agents: &BTreeSet<AgentId>,
        props: &BTreeSet<PropId>,
    ) -> Result<(), FormulaError> {
        let mut used_agents = BTreeSet::new();
        let mut used_props = BTreeSet::new();
        self.symbols(&mut used_agents, &mut used_props);
        if let Some(a) = used_agents.into_iter().find(|a| !agents.contains(*a)) {
            return Err(FormulaError::UnknownAgent(a.clone()));
        }
        if let Some(p) = used_props.into_iter().find(|p| !props.contains(*p)) {
            return Err(FormulaError::UnknownProp(p.clone()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("`{0}` needs a proposition to expand into, but the vocabulary is empty")]
    NoPropositionForConstant(&'static str),
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("unknown proposition `{0}`")]
    UnknownProp(PropId),
}

/// Parses `text` and checks every name against `agents` and `props`.
pub fn parse_formula(
    text: &str,
    agents: &BTreeSet<AgentId>,
    props: &BTreeSet<PropId>,
) -> Result<Formula, FormulaError> {
    let f = parse_formula_syntax(text, props.iter().next())?;
    f.check_symbols(agents, props)?;
    Ok(f)
}

/// Parses `text` without checking names. `top_prop` is the proposition the
/// constants `T` and `F` expand into.
pub fn parse_formula_syntax(text: &str, top_prop: Option<&PropId>) -> Result<Formula, FormulaError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        top_prop,
        end: text.len(),
    };
    let f = parser.implies()?;
    match parser.peek() {
        None => Ok(f),
        Some(_) => Err(parser.unexpected(&["`&`", "`|`", "`->`", "end of input"])),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Tilde,
    Amp,
    Pipe,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'~' => Tok::Tilde,
            b'&' => Tok::Amp,
            b'|' => Tok::Pipe,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((i, Tok::Arrow));
                i += 2;
                continue;
            }
            b if b.is_ascii_alphanumeric() || b == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Name(text[start..i].to_owned())));
                continue;
            }
            _ => {
                let found = text[i..].chars().next().map(String::from).unwrap_or_default();
                return Err(FormulaError::Syntax {
                    position: i,
                    expected: alloc::vec!["a name", "an operator", "a parenthesis"],
                    found: alloc::format!("`{found}`"),
                });
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'p> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    top_prop: Option<&'p PropId>,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> FormulaError {
        let (position, found) = match self.tokens.get(self.pos) {
            Some((p, t)) => (*p, alloc::format!("{t}")),
            None => (self.end, "end of input".to_owned()),
        };
        FormulaError::Syntax {
            position,
            expected: expected.to_vec(),
            found,
        }
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), FormulaError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Name(n)) if (n == "B" || n == "D") && self.peek_at(1) == Some(&Tok::LBracket) => {
                let diamond = n == "D";
                self.pos += 2;
                let agent = match self.bump() {
                    Some(Tok::Name(a)) => AgentId::new(a),
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected(&["an agent name"]));
                    }
                };
                self.expect(Tok::RBracket, "`]`")?;
                let body = self.unary()?;
                Ok(if diamond {
                    Formula::possible(agent, body)
                } else {
                    Formula::believes(agent, body)
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implies()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Name(n)) if n == "T" || n == "F" => {
                let constant = if n == "T" { "T" } else { "F" };
                let p = self
                    .top_prop
                    .ok_or(FormulaError::NoPropositionForConstant(constant))?;
                self.pos += 1;
                Ok(if constant == "T" {
                    Formula::top(p.clone())
                } else {
                    Formula::bottom(p.clone())
                })
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(Formula::Prop(PropId::new(n)))
            }
            _ => Err(self.unexpected(&["a proposition", "`~`", "`B[`", "`D[`", "`(`"])),
        }
    }
}

// Printer. Re-sugars `~B[a]~f` as `D[a] f` and `~(~l & ~r)` as `l | r`;
// both forms parse back to the same core tree.

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

enum View<'a> {
    Atom(&'a PropId),
    Not(&'a Formula),
    And(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    Box_(&'a AgentId, &'a Formula),
    Diamond(&'a AgentId, &'a Formula),
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Formula::Prop(p) => View::Atom(p),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Believes(a, body) => match body.as_ref() {
                Formula::Not(b) => View::Diamond(a, b),
                _ => View::Not(inner),
            },
            Formula::And(l, r) => match (l.as_ref(), r.as_ref()) {
                (Formula::Not(l), Formula::Not(r)) => View::Or(l, r),
                _ => View::Not(inner),
            },
            _ => View::Not(inner),
        },
        Formula::And(l, r) => View::And(l, r),
        Formula::Believes(a, body) => View::Box_(a, body),
    }
}

fn precedence(v: &View<'_>) -> u8 {
    match v {
        View::Or(..) => PREC_OR,
        View::And(..) => PREC_AND,
        _ => PREC_UNARY,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match view(self) {
            View::Atom(p) => write!(f, "{p}"),
            View::Not(c) => {
                f.write_str("~")?;
                write_child(f, c, precedence(&view(c)) < PREC_UNARY)
            }
            View::Box_(a, c) => {
                write!(f, "B[{a}] ")?;
                write_child(f, c, precedence(&view(c)) < PREC_UNARY)
            }
            View::Diamond(a, c) => {
                write!(f, "D[{a}] ")?;
                write_child(f, c, precedence(&view(c)) < PREC_UNARY)
            }
            View::And(l, r) => {
                write_child(f, l, precedence(&view(l)) < PREC_AND)?;
                f.write_str(" & ")?;
                write_child(f, r, precedence(&view(r)) <= PREC_AND)
            }
            View::Or(l, r) => {
                write_child(f, l, precedence(&view(l)) < PREC_OR)?;
                f.write_str(" | ")?;
                write_child(f, r, precedence(&view(r)) <= PREC_OR)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn set<T: From<&'static str> + Ord>(xs: &[&'static str]) -> BTreeSet<T> {
        xs.iter().map(|x| T::from(x)).collect()
    }

    fn parse(text: &str, agents: &[&'static str], props: &[&'static str]) -> Formula {
        parse_formula(text, &set(agents), &set(props)).unwrap()
    }

    #[test]
    fn atomic() {
        assert_eq!(parse("y", &["a"], &["y"]), Formula::prop("y"));
    }

    #[test]
    fn diamond_expands() {
        assert_eq!(
            parse("D[1] y", &["1"], &["y"]),
            Formula::not(Formula::believes("1", Formula::not(Formula::prop("y"))))
        );
    }

    #[test]
    fn belief_over_conjunction() {
        assert_eq!(
            parse("B[a] (p & ~q)", &["a"], &["p", "q"]),
            Formula::believes("a", Formula::and(Formula::prop("p"), Formula::not(Formula::prop("q"))))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let g = |t| parse(t, &["a"], &["p", "q", "r"]);
        assert_eq!(g("p & q | r"), g("(p & q) | r"));
        assert_eq!(g("p | q & r"), g("p | (q & r)"));
        assert_eq!(g("p -> q -> r"), g("p -> (q -> r)"));
        assert_eq!(g("p | q -> r"), g("(p | q) -> r"));
        assert_eq!(g("~p & q"), g("(~p) & q"));
        assert_eq!(g("B[a] p & q"), g("(B[a] p) & q"));
        assert_eq!(
            g("p & q & r"),
            Formula::and(Formula::and(Formula::prop("p"), Formula::prop("q")), Formula::prop("r"))
        );
    }

    #[test]
    fn constants_use_first_prop() {
        let f = parse("T", &["a"], &["q", "p"]);
        assert_eq!(f, Formula::top("p"));
        assert_eq!(parse("F", &["a"], &["q", "p"]), Formula::not(Formula::top("p")));
    }

    #[test]
    fn printer_examples() {
        assert_eq!(Formula::prop("y").to_string(), "y");
        assert_eq!(Formula::believes("a", Formula::prop("p")).to_string(), "B[a] p");
        let d = Formula::not(Formula::believes("1", Formula::not(Formula::prop("y"))));
        assert_eq!(d.to_string(), "D[1] y");
    }

    #[test]
    fn printer_round_trips_tricky_shapes() {
        let cases = [
            "~(p | q)",
            "(p | q) & r",
            "p & (q & r)",
            "p | (q | r)",
            "~~p",
            "B[a] ~(p & q)",
            "D[a] (p | q)",
            "~D[1] y | y",
            "~B[a] ~~p",
            "~(~p & q)",
        ];
        for c in cases {
            let f = parse(c, &["a", "1"], &["p", "q", "r", "y"]);
            let printed = f.to_string();
            let again = parse(&printed, &["a", "1"], &["p", "q", "r", "y"]);
            assert_eq!(f, again, "{c} printed as {printed}");
        }
    }

    #[test]
    fn metrics_on_known_formulas() {
        assert_eq!(Formula::prop("p").modal_depth(), 0);
        assert_eq!(Formula::prop("p").size(), 1);
        let bp = Formula::believes("a", Formula::prop("p"));
        assert_eq!(bp.modal_depth(), 1);
        assert_eq!(bp.size(), 2);
        let q = parse("D[1] B[2] (D[a] D[1] y | D[a] D[2] y)", &["a", "1", "2"], &["y"]);
        assert_eq!(q.modal_depth(), 4);
        let pre = parse("~D[1] y | y", &["1"], &["y"]);
        assert_eq!(pre.size(), 10);
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_formula("p & ", &set(&["a"]), &set(&["p"])).unwrap_err();
        match err {
            FormulaError::Syntax { position, found, .. } => {
                assert_eq!(position, 4);
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_formula("B[a p", &set(&["a"]), &set(&["p"])).unwrap_err();
        assert!(matches!(err, FormulaError::Syntax { position: 4, .. }), "{err:?}");
        let err = parse_formula("p $ q", &set(&["a"]), &set(&["p", "q"])).unwrap_err();
        assert!(matches!(err, FormulaError::Syntax { position: 2, .. }));
        let err = parse_formula("(p", &set(&["a"]), &set(&["p"])).unwrap_err();
        assert!(matches!(err, FormulaError::Syntax { ref expected, .. } if expected == &["`)`"]));
    }

    #[test]
    fn unknown_names() {
        assert_eq!(
            parse_formula("B[b] p", &set(&["a"]), &set(&["p"])),
            Err(FormulaError::UnknownAgent(AgentId::new("b")))
        );
        assert_eq!(
            parse_formula("B[a] q", &set(&["a"]), &set(&["p"])),
            Err(FormulaError::UnknownProp(PropId::new("q")))
        );
        assert_eq!(
            parse_formula_syntax("T", None),
            Err(FormulaError::NoPropositionForConstant("T"))
        );
    }

    #[test]
    fn b_without_bracket_is_a_proposition() {
        assert_eq!(parse("B & D", &["a"], &["B", "D"]), Formula::and(Formula::prop("B"), Formula::prop("D")));
    }
}
