//! Bounded-domain grounding of formulas into CNF.
//!
//! Universal quantifiers become conjunctions over the domain and existential
//! ones disjunctions. Nested conjunctions under a disjunction are named by a
//! fresh variable that implies them (one-sided Tseitin encoding).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::syntax::{AxiomId, Concept, Formula, Literal};

pub type Clause = Vec<i32>;

/// Where a ground clause came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "kebab-case")]
pub enum Origin {
    Axiom(AxiomId),
    PositiveTest(usize),
    NegativeTest(usize),
    Extra(usize),
}

/// The finite set of domain elements formulas are instantiated over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub elements: Vec<String>,
}

impl Domain {
    /// Named individuals in order of first occurrence followed by `budget`
    /// witnesses for each existential occurrence.
    pub fn for_formulas<'a>(formulas: impl IntoIterator<Item = &'a Formula>, budget: usize) -> Domain {
        let mut elements: Vec<String> = Vec::new();
        let mut existentials = 0;
        for f in formulas {
            for a in f.individuals() {
                if !elements.contains(&a) {
                    elements.push(a);
                }
            }
            existentials += f.existential_occurrences();
        }
        for i in 0..existentials * budget {
            elements.push(format!("_w{}", i + 1));
        }
        Domain { elements }
    }

    pub fn push_fresh(&mut self, name: &str) -> String {
        let mut candidate = name.to_string();
        let mut i = 1;
        while self.elements.contains(&candidate) {
            i += 1;
            candidate = format!("{name}{i}");
        }
        self.elements.push(candidate.clone());
        candidate
    }
}

/// Variable numbering: named atoms plus anonymous auxiliary variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    atoms: HashMap<String, i32>,
    names: Vec<Option<String>>,
}

impl VarTable {
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn lookup(&self, atom: &str) -> Option<i32> {
        self.atoms.get(atom).copied()
    }

    pub fn atoms(&self) -> BTreeMap<String, u32> {
        self.atoms.iter().map(|(k, v)| (k.clone(), *v as u32)).collect()
    }
}

/// Source of variables during grounding.
pub trait Vars {
    fn atom(&mut self, key: &str) -> i32;
    fn aux(&mut self) -> i32;
}

impl Vars for VarTable {
    fn atom(&mut self, key: &str) -> i32 {
        if let Some(&v) = self.atoms.get(key) {
            return v;
        }
        self.names.push(Some(key.to_string()));
        let v = self.names.len() as i32;
        self.atoms.insert(key.to_string(), v);
        v
    }

    fn aux(&mut self) -> i32 {
        self.names.push(None);
        self.names.len() as i32
    }
}

/// Extends a frozen table with local variables numbered after it.
pub struct Overlay<'a> {
    base: &'a VarTable,
    local: HashMap<String, i32>,
    next: i32,
}

impl<'a> Overlay<'a> {
    pub fn new(base: &'a VarTable) -> Overlay<'a> {
        Overlay { base, local: HashMap::new(), next: base.num_vars() as i32 }
    }

    pub fn num_vars(&self) -> usize {
        self.next as usize
    }
}

impl Vars for Overlay<'_> {
    fn atom(&mut self, key: &str) -> i32 {
        if let Some(v) = self.base.lookup(key) {
            return v;
        }
        if let Some(&v) = self.local.get(key) {
            return v;
        }
        self.next += 1;
        self.local.insert(key.to_string(), self.next);
        self.next
    }

    fn aux(&mut self) -> i32 {
        self.next += 1;
        self.next
    }
}

pub fn atom_key(pred: &str, args: &[&str]) -> String {
    if args.is_empty() {
        pred.to_string()
    } else {
        format!("{pred}({})", args.join(","))
    }
}

/// Propositional formula over atom variables, kept in negation normal form.
#[derive(Clone, Debug)]
enum G {
    T,
    F,
    Lit(i32),
    And(Vec<G>),
    Or(Vec<G>),
}

fn and(items: Vec<G>) -> G {
    let mut out = Vec::with_capacity(items.len());
    for g in items {
        match g {
            G::T => {}
            G::F => return G::F,
            G::And(inner) => out.extend(inner),
            g => out.push(g),
        }
    }
    match out.len() {
        0 => G::T,
        1 => out.pop().unwrap(),
        _ => G::And(out),
    }
}

fn or(items: Vec<G>) -> G {
    let mut out = Vec::with_capacity(items.len());
    for g in items {
        match g {
            G::F => {}
            G::T => return G::T,
            G::Or(inner) => out.extend(inner),
            g => out.push(g),
        }
    }
    match out.len() {
        0 => G::F,
        1 => out.pop().unwrap(),
        _ => G::Or(out),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("quantifier nesting deeper than 1 in {origin}")]
    NestingDepth { origin: String },
}

/// Instantiates formulas over a fixed domain.
pub struct Grounder<'d, V: Vars> {
    pub domain: &'d Domain,
    pub vars: V,
}

impl<'d, V: Vars> Grounder<'d, V> {
    pub fn new(domain: &'d Domain, vars: V) -> Self {
        Grounder { domain, vars }
    }

    fn lit(&mut self, pred: &str, args: &[&str], positive: bool) -> G {
        let v = self.vars.atom(&atom_key(pred, args));
        G::Lit(if positive { v } else { -v })
    }

    /// C(x) when `positive`, otherwise its negation, in NNF.
    fn concept(&mut self, c: &Concept, x: &str, positive: bool) -> G {
        match c {
            Concept::Top => {
                if positive {
                    G::T
                } else {
                    G::F
                }
            }
            Concept::Bottom => {
                if positive {
                    G::F
                } else {
                    G::T
                }
            }
            Concept::Atom(a) => self.lit(a, &[x], positive),
            Concept::Not(c) => self.concept(c, x, !positive),
            Concept::And(cs) | Concept::Or(cs) => {
                let parts = cs.iter().map(|c| self.concept(c, x, positive)).collect();
                if matches!(c, Concept::And(_)) == positive {
                    and(parts)
                } else {
                    or(parts)
                }
            }
            Concept::Some(r, f) | Concept::All(r, f) => {
                let existential = matches!(c, Concept::Some(..)) == positive;
                let domain = self.domain;
                let mut parts = Vec::with_capacity(domain.elements.len());
                for y in &domain.elements {
                    let filler = self.concept(f, y, positive);
                    if existential {
                        let edge = self.lit(r, &[x, y], true);
                        parts.push(and(vec![edge, filler]));
                    } else {
                        let edge = self.lit(r, &[x, y], false);
                        parts.push(or(vec![edge, filler]));
                    }
                }
                if existential {
                    or(parts)
                } else {
                    and(parts)
                }
            }
        }
    }

    fn literal(&mut self, l: &Literal, positive: bool) -> G {
        let args: Vec<&str> = l.args.iter().map(String::as_str).collect();
        self.lit(&l.pred, &args, l.positive == positive)
    }

    /// The formula itself.
    fn formula(&mut self, f: &Formula) -> G {
        let domain = self.domain;
        match f {
            Formula::Sub(c, d) => and(domain
                .elements
                .iter()
                .map(|x| {
                    let l = self.concept(c, x, false);
                    let r = self.concept(d, x, true);
                    or(vec![l, r])
                })
                .collect()),
            Formula::Equiv(c, d) => and(vec![
                self.formula(&Formula::Sub(c.clone(), d.clone())),
                self.formula(&Formula::Sub(d.clone(), c.clone())),
            ]),
            Formula::Disjoint(c, d) => and(domain
                .elements
                .iter()
                .map(|x| {
                    let l = self.concept(c, x, false);
                    let r = self.concept(d, x, false);
                    or(vec![l, r])
                })
                .collect()),
            Formula::ConceptAssertion(c, a) => self.concept(c, a, true),
            Formula::RoleAssertion(r, a, b) => self.lit(r, &[a, b], true),
            Formula::Clause(lits) => or(lits.iter().map(|l| self.literal(l, true)).collect()),
        }
    }

    /// Negation of the formula.
    fn negated(&mut self, f: &Formula) -> G {
        let domain = self.domain;
        match f {
            Formula::Sub(c, d) => or(domain
                .elements
                .iter()
                .map(|x| {
                    let l = self.concept(c, x, true);
                    let r = self.concept(d, x, false);
                    and(vec![l, r])
                })
                .collect()),
            Formula::Equiv(c, d) => or(vec![
                self.negated(&Formula::Sub(c.clone(), d.clone())),
                self.negated(&Formula::Sub(d.clone(), c.clone())),
            ]),
            Formula::Disjoint(c, d) => or(domain
                .elements
                .iter()
                .map(|x| {
                    let l = self.concept(c, x, true);
                    let r = self.concept(d, x, true);
                    and(vec![l, r])
                })
                .collect()),
            Formula::ConceptAssertion(c, a) => self.concept(c, a, false),
            Formula::RoleAssertion(r, a, b) => self.lit(r, &[a, b], false),
            Formula::Clause(lits) => and(lits.iter().map(|l| self.literal(l, false)).collect()),
        }
    }

    fn cnf(&mut self, g: G, out: &mut Vec<Clause>) {
        match g {
            G::T => {}
            G::F => out.push(Vec::new()),
            G::Lit(l) => out.push(vec![l]),
            G::And(gs) => {
                for g in gs {
                    self.cnf(g, out);
                }
            }
            G::Or(gs) => {
                let mut main: Vec<i32> = Vec::new();
                let mut extra = Vec::new();
                for g in gs {
                    let mut sub = Vec::new();
                    self.cnf(g, &mut sub);
                    match sub.len() {
                        0 => return,
                        1 => main.extend(sub.pop().unwrap()),
                        _ => {
                            let t = self.vars.aux();
                            for mut c in sub {
                                c.insert(0, -t);
                                extra.push(c);
                            }
                            main.push(t);
                        }
                    }
                }
                main.sort_unstable_by_key(|l| (l.abs(), *l));
                main.dedup();
                if main.windows(2).any(|w| w[0] == -w[1]) {
                    return;
                }
                out.push(main);
                out.extend(extra);
            }
        }
    }

    /// CNF asserting the formula.
    pub fn assert(&mut self, f: &Formula) -> Vec<Clause> {
        let g = self.formula(f);
        let mut out = Vec::new();
        self.cnf(g, &mut out);
        out
    }

    /// CNF asserting that at least one formula of the list is false.
    pub fn refute(&mut self, fs: &[Formula]) -> Vec<Clause> {
        let parts = fs.iter().map(|f| self.negated(f)).collect();
        let g = or(parts);
        let mut out = Vec::new();
        self.cnf(g, &mut out);
        out
    }

    /// Unit clause `p(x)`.
    pub fn unit(&mut self, pred: &str, x: &str) -> Vec<Clause> {
        vec![vec![self.vars.atom(&atom_key(pred, &[x]))]]
    }
}

pub fn check_depth(f: &Formula, origin: &str) -> Result<(), GroundError> {
    if f.quantifier_depth() > 1 {
        Err(GroundError::NestingDepth { origin: origin.to_string() })
    } else {
        Ok(())
    }
}

/// Clause set produced by grounding a DPI.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTheory {
    pub variables: BTreeMap<String, u32>,
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
    pub domain: Vec<String>,
    pub provenance: Vec<Origin>,
}

impl GroundTheory {
    pub fn satisfiable(&self) -> bool {
        super::sat::satisfiable(self.num_vars, self.clauses.iter().map(Vec::as_slice))
    }
}

/// Ground a list of formulas over the domain they induce.
pub fn ground_formulas(items: &[(Origin, &Formula)], budget: usize) -> Result<GroundTheory, GroundError> {
    for (o, f) in items {
        check_depth(f, &format!("{o:?}"))?;
    }
    let domain = Domain::for_formulas(items.iter().map(|(_, f)| *f), budget);
    let mut g = Grounder::new(&domain, VarTable::default());
    let mut clauses = Vec::new();
    let mut provenance = Vec::new();
    for (o, f) in items {
        for c in g.assert(f) {
            clauses.push(c);
            provenance.push(*o);
        }
    }
    Ok(GroundTheory {
        variables: g.vars.atoms(),
        num_vars: g.vars.num_vars(),
        clauses,
        domain: domain.elements.clone(),
        provenance,
    })
}
