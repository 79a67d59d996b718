//! Parser and AST for the knowledge-base statement language.
//!
//! One statement per line, `#` starts a comment:
//!
//! ```text
//! A sub (and B (not C))
//! M3 equiv (or B C)
//! disjoint Student DeptMember
//! (not R)(w)
//! s(u,w)
//! clause p(a) | -q(a)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub type AxiomId = u32;

/// Concept expression. Quantifier fillers may not contain further quantifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bottom,
    Atom(String),
    Not(Box<Concept>),
    And(Vec<Concept>),
    Or(Vec<Concept>),
    Some(String, Box<Concept>),
    All(String, Box<Concept>),
}

impl Concept {
    pub fn atom(name: &str) -> Concept {
        Concept::Atom(name.to_string())
    }

    /// Deepest chain of nested quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atom(_) => 0,
            Concept::Not(c) => c.quantifier_depth(),
            Concept::And(cs) | Concept::Or(cs) => {
                cs.iter().map(Concept::quantifier_depth).max().unwrap_or(0)
            }
            Concept::Some(_, c) | Concept::All(_, c) => 1 + c.quantifier_depth(),
        }
    }

    fn collect_names(&self, concepts: &mut Vec<String>, roles: &mut Vec<String>) {
        match self {
            Concept::Top | Concept::Bottom => {}
            Concept::Atom(a) => concepts.push(a.clone()),
            Concept::Not(c) => c.collect_names(concepts, roles),
            Concept::And(cs) | Concept::Or(cs) => {
                for c in cs {
                    c.collect_names(concepts, roles);
                }
            }
            Concept::Some(r, c) | Concept::All(r, c) => {
                roles.push(r.clone());
                c.collect_names(concepts, roles);
            }
        }
    }

    fn count_ops(&self, counts: &mut BTreeMap<SyntaxElement, u32>) {
        let mut bump = |e| *counts.entry(e).or_insert(0) += 1;
        match self {
            Concept::Top | Concept::Bottom | Concept::Atom(_) => {}
            Concept::Not(c) => {
                bump(SyntaxElement::Not);
                c.count_ops(counts);
            }
            Concept::And(cs) => {
                bump(SyntaxElement::And);
                cs.iter().for_each(|c| c.count_ops(counts));
            }
            Concept::Or(cs) => {
                bump(SyntaxElement::Or);
                cs.iter().for_each(|c| c.count_ops(counts));
            }
            Concept::Some(_, c) => {
                bump(SyntaxElement::Some);
                c.count_ops(counts);
            }
            Concept::All(_, c) => {
                bump(SyntaxElement::All);
                c.count_ops(counts);
            }
        }
    }

    /// Existential quantifiers after pushing negation inward, given the polarity
    /// the concept occurs under.
    pub(crate) fn existentials(&self, positive: bool) -> usize {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atom(_) => 0,
            Concept::Not(c) => c.existentials(!positive),
            Concept::And(cs) | Concept::Or(cs) => cs.iter().map(|c| c.existentials(positive)).sum(),
            Concept::Some(_, c) => usize::from(positive) + c.existentials(positive),
            Concept::All(_, c) => usize::from(!positive) + c.existentials(positive),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => write!(f, "top"),
            Concept::Bottom => write!(f, "bottom"),
            Concept::Atom(a) => write!(f, "{a}"),
            Concept::Not(c) => write!(f, "(not {c})"),
            Concept::And(cs) | Concept::Or(cs) => {
                let op = if matches!(self, Concept::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
            Concept::Some(r, c) => write!(f, "(some {r} {c})"),
            Concept::All(r, c) => write!(f, "(all {r} {c})"),
        }
    }
}

/// Ground literal of a propositional clause. Arguments may be empty (a 0-ary atom).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub pred: String,
    pub args: Vec<String>,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "-")?;
        }
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

/// A parsed closed statement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Sub(Concept, Concept),
    Equiv(Concept, Concept),
    Disjoint(Concept, Concept),
    ConceptAssertion(Concept, String),
    RoleAssertion(String, String, String),
    Clause(Vec<Literal>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomKind {
    Subsumption,
    Equivalence,
    Disjointness,
    ConceptAssertion,
    RoleAssertion,
    PropositionalClause,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntaxElement {
    Sub,
    Equiv,
    Not,
    And,
    Or,
    Some,
    All,
}

impl SyntaxElement {
    pub const ALL: [SyntaxElement; 7] = [
        SyntaxElement::Sub,
        SyntaxElement::Equiv,
        SyntaxElement::Not,
        SyntaxElement::And,
        SyntaxElement::Or,
        SyntaxElement::Some,
        SyntaxElement::All,
    ];
}

impl Formula {
    pub fn kind(&self) -> AxiomKind {
        match self {
            Formula::Sub(..) => AxiomKind::Subsumption,
            Formula::Equiv(..) => AxiomKind::Equivalence,
            Formula::Disjoint(..) => AxiomKind::Disjointness,
            Formula::ConceptAssertion(..) => AxiomKind::ConceptAssertion,
            Formula::RoleAssertion(..) => AxiomKind::RoleAssertion,
            Formula::Clause(_) => AxiomKind::PropositionalClause,
        }
    }

    pub fn syntax_counts(&self) -> BTreeMap<SyntaxElement, u32> {
        let mut counts = BTreeMap::new();
        match self {
            Formula::Sub(c, d) => {
                counts.insert(SyntaxElement::Sub, 1);
                c.count_ops(&mut counts);
                d.count_ops(&mut counts);
            }
            Formula::Equiv(c, d) => {
                counts.insert(SyntaxElement::Equiv, 1);
                c.count_ops(&mut counts);
                d.count_ops(&mut counts);
            }
            Formula::Disjoint(c, d) => {
                c.count_ops(&mut counts);
                d.count_ops(&mut counts);
            }
            Formula::ConceptAssertion(c, _) => c.count_ops(&mut counts),
            Formula::RoleAssertion(..) | Formula::Clause(_) => {}
        }
        counts
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Sub(c, d) | Formula::Equiv(c, d) | Formula::Disjoint(c, d) => {
                c.quantifier_depth().max(d.quantifier_depth())
            }
            Formula::ConceptAssertion(c, _) => c.quantifier_depth(),
            Formula::RoleAssertion(..) | Formula::Clause(_) => 0,
        }
    }

    /// Number of existential quantifier occurrences once the formula is in
    /// negation normal form (each one gets its own witness constants).
    pub fn existential_occurrences(&self) -> usize {
        match self {
            Formula::Sub(c, d) => c.existentials(false) + d.existentials(true),
            Formula::Equiv(c, d) => {
                c.existentials(false) + d.existentials(true) + d.existentials(false) + c.existentials(true)
            }
            Formula::Disjoint(c, d) => c.existentials(false) + d.existentials(false),
            Formula::ConceptAssertion(c, _) => c.existentials(true),
            Formula::RoleAssertion(..) | Formula::Clause(_) => 0,
        }
    }

    /// Named individuals in order of first occurrence.
    pub fn individuals(&self) -> Vec<String> {
        match self {
            Formula::ConceptAssertion(_, a) => vec![a.clone()],
            Formula::RoleAssertion(_, a, b) => vec![a.clone(), b.clone()],
            Formula::Clause(lits) => lits.iter().flat_map(|l| l.args.iter().cloned()).collect(),
            _ => Vec::new(),
        }
    }

    /// Predicate names with their arity.
    pub fn predicates(&self) -> Vec<(String, usize)> {
        let mut concepts = Vec::new();
        let mut roles = Vec::new();
        match self {
            Formula::Sub(c, d) | Formula::Equiv(c, d) | Formula::Disjoint(c, d) => {
                c.collect_names(&mut concepts, &mut roles);
                d.collect_names(&mut concepts, &mut roles);
            }
            Formula::ConceptAssertion(c, _) => c.collect_names(&mut concepts, &mut roles),
            Formula::RoleAssertion(r, _, _) => roles.push(r.clone()),
            Formula::Clause(lits) => {
                return lits.iter().map(|l| (l.pred.clone(), l.args.len())).collect();
            }
        }
        concepts
            .into_iter()
            .map(|c| (c, 1))
            .chain(roles.into_iter().map(|r| (r, 2)))
            .collect()
    }

    /// Unary predicate names occurring in the formula.
    pub fn unary_predicates(&self) -> Vec<String> {
        self.predicates()
            .into_iter()
            .filter(|(_, arity)| *arity == 1)
            .map(|(p, _)| p)
            .collect()
    }

    pub fn is_assertion(&self) -> bool {
        matches!(self, Formula::ConceptAssertion(..) | Formula::RoleAssertion(..))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Sub(c, d) => write!(f, "{c} sub {d}"),
            Formula::Equiv(c, d) => write!(f, "{c} equiv {d}"),
            Formula::Disjoint(c, d) => write!(f, "disjoint {c} {d}"),
            Formula::ConceptAssertion(c, a) => write!(f, "{c}({a})"),
            Formula::RoleAssertion(r, a, b) => write!(f, "{r}({a},{b})"),
            Formula::Clause(lits) => {
                write!(f, "clause")?;
                for (i, l) in lits.iter().enumerate() {
                    let sep = if i == 0 { " " } else { " | " };
                    write!(f, "{sep}{l}")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

/// A KB statement with a stable id and its operator census.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub id: AxiomId,
    pub text: String,
    pub kind: AxiomKind,
    pub syntax_counts: BTreeMap<SyntaxElement, u32>,
    pub formula: Formula,
}

impl Axiom {
    pub fn new(id: AxiomId, text: &str, formula: Formula) -> Axiom {
        Axiom {
            id,
            text: text.trim().to_string(),
            kind: formula.kind(),
            syntax_counts: formula.syntax_counts(),
            formula,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Bar,
    Minus,
    Ident(String),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == ':' || c == '\''
}

impl Lexer {
    fn new(text: &str, line: usize) -> Result<Lexer, ParseError> {
        let mut toks = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                ' ' | '\t' | '\r' => {}
                '(' => toks.push((Tok::Open, col)),
                ')' => toks.push((Tok::Close, col)),
                ',' => toks.push((Tok::Comma, col)),
                '|' => toks.push((Tok::Bar, col)),
                '-' | '~' => toks.push((Tok::Minus, col)),
                c if is_ident_char(c) => {
                    let start = i;
                    while i + 1 < chars.len() && is_ident_char(chars[i + 1]) {
                        i += 1;
                    }
                    toks.push((Tok::Ident(chars[start..=i].iter().collect()), col));
                }
                other => {
                    return Err(ParseError {
                        line,
                        column: col,
                        message: format!("unexpected character '{other}'"),
                    })
                }
            }
            i += 1;
        }
        Ok(Lexer { toks, pos: 0, line, end_col: chars.len() + 1 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, column: self.col(), message: message.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

const RESERVED: [&str; 11] = ["sub", "equiv", "disjoint", "clause", "and", "or", "not", "some", "all", "top", "bottom"];

/// Stateful parser. Keeps a predicate arity table so that clashes across
/// statements are detected.
#[derive(Default, Debug, Clone)]
pub struct Parser {
    arity: HashMap<String, usize>,
}

impl Parser {
    pub fn new() -> Parser {
        Parser::default()
    }

    /// Parse a multi-line source into formulas paired with their source text.
    pub fn parse_source(&mut self, source: &str) -> Result<Vec<(String, Formula)>, ParseError> {
        let mut out = Vec::new();
        for (i, raw) in source.lines().enumerate() {
            let text = raw.split('#').next().unwrap_or("");
            if text.trim().is_empty() {
                continue;
            }
            let f = self.parse_line(text, i + 1)?;
            out.push((text.trim().to_string(), f));
        }
        Ok(out)
    }

    /// Parse exactly one statement.
    pub fn parse_statement(&mut self, text: &str) -> Result<Formula, ParseError> {
        let mut parsed = self.parse_source(text)?;
        match parsed.len() {
            1 => Ok(parsed.pop().unwrap().1),
            0 => Err(ParseError { line: 1, column: 1, message: "empty statement".into() }),
            _ => Err(ParseError { line: 2, column: 1, message: "expected a single statement".into() }),
        }
    }

    fn parse_line(&mut self, text: &str, line: usize) -> Result<Formula, ParseError> {
        let mut lx = Lexer::new(text, line)?;
        let f = match lx.peek() {
            Some(Tok::Ident(k)) if k == "clause" => {
                lx.next();
                self.clause(&mut lx)?
            }
            Some(Tok::Ident(k)) if k == "disjoint" => {
                lx.next();
                let c = self.concept(&mut lx)?;
                let d = self.concept(&mut lx)?;
                Formula::Disjoint(c, d)
            }
            None => return lx.err("empty statement"),
            _ => {
                let c = self.concept(&mut lx)?;
                match lx.peek() {
                    Some(Tok::Ident(k)) if k == "sub" || k == "equiv" => {
                        let sub = k == "sub";
                        lx.next();
                        let d = self.concept(&mut lx)?;
                        if sub {
                            Formula::Sub(c, d)
                        } else {
                            Formula::Equiv(c, d)
                        }
                    }
                    Some(Tok::Open) => {
                        let args = self.args(&mut lx)?;
                        match (args.len(), c) {
                            (1, c) => Formula::ConceptAssertion(c, args[0].clone()),
                            (2, Concept::Atom(r)) => {
                                self.check_arity(&lx, &r, 2)?;
                                Formula::RoleAssertion(r, args[0].clone(), args[1].clone())
                            }
                            (2, _) => return lx.err("role assertion needs a role name"),
                            _ => return lx.err("assertions take one or two individuals"),
                        }
                    }
                    None => return lx.err("expected 'sub', 'equiv' or an assertion"),
                    _ => return lx.err("expected 'sub', 'equiv' or '('"),
                }
            }
        };
        if !lx.at_end() {
            return lx.err("unexpected trailing input");
        }
        if !matches!(f, Formula::Clause(_) | Formula::RoleAssertion(..)) {
            let mut concepts = Vec::new();
            let mut roles = Vec::new();
            match &f {
                Formula::Sub(c, d) | Formula::Equiv(c, d) | Formula::Disjoint(c, d) => {
                    c.collect_names(&mut concepts, &mut roles);
                    d.collect_names(&mut concepts, &mut roles);
                }
                Formula::ConceptAssertion(c, _) => c.collect_names(&mut concepts, &mut roles),
                _ => {}
            }
            for c in concepts {
                self.check_arity(&lx, &c, 1)?;
            }
            for r in roles {
                self.check_arity(&lx, &r, 2)?;
            }
        }
        Ok(f)
    }

    fn check_arity(&mut self, lx: &Lexer, name: &str, arity: usize) -> Result<(), ParseError> {
        match self.arity.get(name) {
            Some(&a) if a != arity => Err(ParseError {
                line: lx.line,
                column: 1,
                message: format!("predicate '{name}' used with arity {arity} but earlier with arity {a}"),
            }),
            Some(_) => Ok(()),
            None => {
                self.arity.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    fn name(&self, lx: &mut Lexer, what: &str) -> Result<String, ParseError> {
        let col = lx.col();
        let s = lx.ident(what)?;
        if RESERVED.contains(&s.as_str()) {
            return Err(ParseError { line: lx.line, column: col, message: format!("'{s}' is a keyword") });
        }
        Ok(s)
    }

    fn concept(&mut self, lx: &mut Lexer) -> Result<Concept, ParseError> {
        match lx.peek() {
            Some(Tok::Ident(s)) if s == "top" => {
                lx.next();
                Ok(Concept::Top)
            }
            Some(Tok::Ident(s)) if s == "bottom" => {
                lx.next();
                Ok(Concept::Bottom)
            }
            Some(Tok::Ident(_)) => Ok(Concept::Atom(self.name(lx, "concept name")?)),
            Some(Tok::Open) => {
                lx.next();
                let op = lx.ident("operator")?;
                let c = match op.as_str() {
                    "not" => Concept::Not(Box::new(self.concept(lx)?)),
                    "and" | "or" => {
                        let mut cs = Vec::new();
                        while lx.peek().is_some() && lx.peek() != Some(&Tok::Close) {
                            cs.push(self.concept(lx)?);
                        }
                        if cs.len() < 2 {
                            return lx.err(format!("'{op}' needs at least two operands"));
                        }
                        if op == "and" {
                            Concept::And(cs)
                        } else {
                            Concept::Or(cs)
                        }
                    }
                    "some" | "all" => {
                        let r = self.name(lx, "role name")?;
                        let c = Box::new(self.concept(lx)?);
                        if op == "some" {
                            Concept::Some(r, c)
                        } else {
                            Concept::All(r, c)
                        }
                    }
                    other => return lx.err(format!("unknown operator '{other}'")),
                };
                lx.expect(Tok::Close, "')'")?;
                Ok(c)
            }
            _ => lx.err("expected a concept"),
        }
    }

    fn args(&mut self, lx: &mut Lexer) -> Result<Vec<String>, ParseError> {
        lx.expect(Tok::Open, "'('")?;
        let mut args = vec![self.name(lx, "individual")?];
        while lx.peek() == Some(&Tok::Comma) {
            lx.next();
            args.push(self.name(lx, "individual")?);
        }
        lx.expect(Tok::Close, "')'")?;
        Ok(args)
    }

    fn clause(&mut self, lx: &mut Lexer) -> Result<Formula, ParseError> {
        let mut lits = Vec::new();
        loop {
            let mut positive = true;
            if lx.peek() == Some(&Tok::Minus) {
                lx.next();
                positive = false;
            } else if lx.peek() == Some(&Tok::Ident("not".into())) {
                lx.next();
                positive = false;
            }
            let pred = self.name(lx, "predicate")?;
            let args = if lx.peek() == Some(&Tok::Open) { self.args(lx)? } else { Vec::new() };
            self.check_arity(lx, &pred, args.len())?;
            lits.push(Literal { positive, pred, args });
            if lx.peek() == Some(&Tok::Bar) {
                lx.next();
            } else {
                break;
            }
        }
        Ok(Formula::Clause(lits))
    }
}

/// Parse a KB source; ids are assigned from 1 in statement order.
pub fn parse_kb(source: &str) -> Result<Vec<Axiom>, ParseError> {
    let mut parser = Parser::new();
    Ok(parser
        .parse_source(source)?
        .into_iter()
        .enumerate()
        .map(|(i, (text, f))| Axiom::new(i as AxiomId + 1, &text, f))
        .collect())
}

/// Parse a single statement with a fresh arity table.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    Parser::new().parse_statement(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_subsumption() {
        let kb = parse_kb("A sub B").unwrap();
        assert_eq!(kb.len(), 1);
        assert_eq!(kb[0].kind, AxiomKind::Subsumption);
        assert_eq!(kb[0].syntax_counts, BTreeMap::from([(SyntaxElement::Sub, 1)]));
    }

    #[test]
    fn operator_census() {
        let kb = parse_kb("A2 sub (and (not (some s M3)) (some s M2))").unwrap();
        let want = BTreeMap::from([
            (SyntaxElement::Sub, 1),
            (SyntaxElement::Not, 1),
            (SyntaxElement::Some, 2),
            (SyntaxElement::And, 1),
        ]);
        assert_eq!(kb[0].syntax_counts, want);
    }

    #[test]
    fn malformed() {
        let err = parse_kb("A sub").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(parse_kb("A sub B\n(foo A)(x)").unwrap_err().line == 2);
    }

    #[test]
    fn assertions_and_clauses() {
        let kb = parse_kb("# c\n(not R)(w)\ns(u,w)\nclause p(a) | -q(a,b) | r\n").unwrap();
        assert_eq!(kb.len(), 3);
        assert_eq!(kb[0].kind, AxiomKind::ConceptAssertion);
        assert_eq!(kb[0].syntax_counts, BTreeMap::from([(SyntaxElement::Not, 1)]));
        assert_eq!(kb[1].formula, Formula::RoleAssertion("s".into(), "u".into(), "w".into()));
        assert_eq!(kb[2].kind, AxiomKind::PropositionalClause);
        assert_eq!(kb.iter().map(|a| a.id).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn arity_clash() {
        let err = parse_kb("A(x)\nA(x,y)").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("arity"));
    }

    #[test]
    fn display_reparses() {
        let src = "res equiv (all writes paper)\n(some writes top) sub res\ndisjoint A (or B C)\n(and A B)(x)\nclause -p(a) | q\n";
        for a in parse_kb(src).unwrap() {
            let again = parse_formula(&a.formula.to_string()).unwrap();
            assert_eq!(again, a.formula);
        }
    }

    #[test]
    fn existential_polarity() {
        let f = parse_formula("res equiv (all writes paper)").unwrap();
        assert_eq!(f.existential_occurrences(), 1);
        let f = parse_formula("(some writes top) sub res").unwrap();
        assert_eq!(f.existential_occurrences(), 0);
        let f = parse_formula("A sub (not (all r B))").unwrap();
        assert_eq!(f.existential_occurrences(), 1);
    }

    #[test]
    fn keywords_rejected_as_names() {
        assert!(parse_formula("and sub B").is_err());
        assert!(parse_formula("A(top)").is_err());
    }
}
