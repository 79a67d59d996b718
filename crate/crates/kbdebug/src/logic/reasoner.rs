//! Consistency, entailment, coherence and requirement checks by SAT over a
//! grounding whose domain is fixed when the reasoner is built.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::dpi::{Dpi, DpiError};
use super::ground::{check_depth, Clause, Domain, GroundError, Grounder, Overlay, VarTable};
use super::sat::Solver;
use super::syntax::{Axiom, AxiomId, Formula};

pub type AxiomSet = BTreeSet<AxiomId>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub consistent: bool,
    pub incoherent_predicates: BTreeSet<String>,
    pub violated_negative_tests: BTreeSet<usize>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.consistent && self.incoherent_predicates.is_empty() && self.violated_negative_tests.is_empty()
    }
}

const PROBE: &str = "_probe";
const COUNTEREXAMPLE: &str = "_cx";

pub struct Reasoner {
    domain: Domain,
    vars: VarTable,
    kb_ids: Vec<AxiomId>,
    kb: Vec<Vec<Clause>>,
    kb_preds: Vec<Vec<String>>,
    fixed: Vec<Clause>,
    fixed_preds: BTreeSet<String>,
    negatives: Vec<Vec<Clause>>,
    coherence: bool,
    probe: String,
    individuals: BTreeSet<String>,
    concepts: BTreeSet<String>,
    memo: Mutex<HashMap<Vec<u64>, bool>>,
}

impl std::fmt::Debug for Reasoner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reasoner")
            .field("domain", &self.domain.elements)
            .field("kb", &self.kb_ids)
            .finish_non_exhaustive()
    }
}

struct Parts<'a> {
    kb: Vec<(AxiomId, &'a Formula)>,
    fixed: Vec<&'a Formula>,
    negatives: Vec<&'a [Formula]>,
    coherence: bool,
    extra: &'a [Formula],
    budget: usize,
}

impl Reasoner {
    pub fn new(dpi: &Dpi) -> Result<Reasoner, GroundError> {
        Reasoner::with_extra(dpi, &[], 1)
    }

    /// Reasoner whose domain also covers the individuals of `extra`.
    pub fn with_extra(dpi: &Dpi, extra: &[Formula], budget: usize) -> Result<Reasoner, GroundError> {
        let fixed = dpi
            .background
            .iter()
            .map(|a| &a.formula)
            .chain(dpi.positive_tests.iter().flat_map(|t| t.formulas.iter()))
            .collect();
        Reasoner::build(Parts {
            kb: dpi.kb.iter().map(|a| (a.id, &a.formula)).collect(),
            fixed,
            negatives: dpi.negative_tests.iter().map(|t| t.formulas.as_slice()).collect(),
            coherence: dpi.requires_coherence(),
            extra,
            budget,
        })
    }

    fn build(p: Parts<'_>) -> Result<Reasoner, GroundError> {
        for (id, f) in &p.kb {
            check_depth(f, &format!("axiom {id}"))?;
        }
        for f in p.fixed.iter().copied().chain(p.negatives.iter().flat_map(|n| n.iter())).chain(p.extra) {
            check_depth(f, "test case")?;
        }
        let everything: Vec<&Formula> = p
            .kb
            .iter()
            .map(|(_, f)| *f)
            .chain(p.fixed.iter().copied())
            .chain(p.negatives.iter().flat_map(|n| n.iter()))
            .chain(p.extra)
            .collect();
        let mut domain = Domain::for_formulas(everything.iter().copied(), p.budget);
        let individuals: BTreeSet<String> = everything.iter().flat_map(|f| f.individuals()).collect();
        let concepts: BTreeSet<String> = everything.iter().flat_map(|f| f.unary_predicates()).collect();
        for _ in 0..p.budget.max(1) {
            domain.push_fresh(COUNTEREXAMPLE);
        }
        let probe = domain.push_fresh(PROBE);

        let mut g = Grounder::new(&domain, VarTable::default());
        let kb: Vec<Vec<Clause>> = p.kb.iter().map(|(_, f)| g.assert(f)).collect();
        let kb_preds = p.kb.iter().map(|(_, f)| f.unary_predicates()).collect();
        let fixed = p.fixed.iter().flat_map(|f| g.assert(f)).collect();
        let fixed_preds = p.fixed.iter().flat_map(|f| f.unary_predicates()).collect();
        let negatives = p.negatives.iter().map(|n| g.refute(n)).collect();
        let vars = g.vars;
        Ok(Reasoner {
            domain,
            vars,
            kb_ids: p.kb.iter().map(|(id, _)| *id).collect(),
            kb,
            kb_preds,
            fixed,
            fixed_preds,
            negatives,
            coherence: p.coherence,
            probe,
            individuals,
            concepts,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn kb_ids(&self) -> &[AxiomId] {
        &self.kb_ids
    }

    pub fn domain(&self) -> &[String] {
        &self.domain.elements
    }

    /// Named individuals of the instance.
    pub fn individuals(&self) -> &BTreeSet<String> {
        &self.individuals
    }

    /// Unary predicate names of the instance.
    pub fn concepts(&self) -> &BTreeSet<String> {
        &self.concepts
    }

    /// True when every individual in `formulas` is part of the domain.
    pub fn covers(&self, formulas: &[Formula]) -> bool {
        formulas.iter().flat_map(|f| f.individuals()).all(|a| self.individuals.contains(&a))
    }

    fn kept_indices(&self, removed: &AxiomSet) -> Vec<usize> {
        (0..self.kb_ids.len()).filter(|&i| !removed.contains(&self.kb_ids[i])).collect()
    }

    fn indices_of(&self, kept: &AxiomSet) -> Vec<usize> {
        (0..self.kb_ids.len()).filter(|&i| kept.contains(&self.kb_ids[i])).collect()
    }

    fn sat(&self, kept: &[usize], extra: &[Clause], more: &[Clause], nvars: usize) -> bool {
        let mut s = Solver::new(nvars);
        let all = self
            .fixed
            .iter()
            .chain(kept.iter().flat_map(|&i| self.kb[i].iter()))
            .chain(extra)
            .chain(more);
        for c in all {
            s.add_clause(c);
        }
        s.solve()
    }

    fn report_for(&self, kept: &[usize], extra: &[Formula], short: bool) -> ValidityReport {
        let mut g = Grounder::new(&self.domain, Overlay::new(&self.vars));
        let extra_cnf: Vec<Clause> = extra.iter().flat_map(|f| g.assert(f)).collect();
        let mut preds: BTreeSet<String> = self.fixed_preds.clone();
        if self.coherence {
            preds.extend(kept.iter().flat_map(|&i| self.kb_preds[i].iter().cloned()));
            preds.extend(extra.iter().flat_map(|f| f.unary_predicates()));
        } else {
            preds.clear();
        }
        let probes: Vec<(String, Vec<Clause>)> =
            preds.into_iter().map(|p| (p.clone(), g.unit(&p, &self.probe))).collect();
        let nvars = g.vars.num_vars();

        let mut report = ValidityReport { consistent: self.sat(kept, &extra_cnf, &[], nvars), ..Default::default() };
        if !report.consistent {
            report.incoherent_predicates = probes.into_iter().map(|(p, _)| p).collect();
            report.violated_negative_tests = (0..self.negatives.len()).collect();
            return report;
        }
        for (p, unit) in probes {
            if !self.sat(kept, &extra_cnf, &unit, nvars) {
                report.incoherent_predicates.insert(p);
                if short {
                    return report;
                }
            }
        }
        for (j, neg) in self.negatives.iter().enumerate() {
            if !self.sat(kept, &extra_cnf, neg, nvars) {
                report.violated_negative_tests.insert(j);
                if short {
                    return report;
                }
            }
        }
        report
    }

    fn memo_key(&self, kept: &[usize]) -> Vec<u64> {
        let mut key = vec![0u64; self.kb_ids.len().div_ceil(64).max(1)];
        for &i in kept {
            key[i / 64] |= 1 << (i % 64);
        }
        key
    }

    fn valid_indices(&self, kept: &[usize]) -> bool {
        let key = self.memo_key(kept);
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.report_for(kept, &[], true).is_valid();
        self.memo.lock().unwrap().insert(key, v);
        v
    }

    /// Full report for (O \ removed) ∪ B ∪ ⋃P.
    pub fn report(&self, removed: &AxiomSet) -> ValidityReport {
        self.report_for(&self.kept_indices(removed), &[], false)
    }

    /// Whether (O \ removed) ∪ B ∪ ⋃P meets every requirement and test case.
    pub fn valid_without(&self, removed: &AxiomSet) -> bool {
        self.valid_indices(&self.kept_indices(removed))
    }

    /// Whether `kept` ∪ B ∪ ⋃P meets every requirement and test case.
    pub fn valid_with(&self, kept: &AxiomSet) -> bool {
        self.valid_indices(&self.indices_of(kept))
    }

    /// Background plus positive test cases alone are valid.
    pub fn admissible(&self) -> bool {
        self.valid_indices(&[])
    }

    /// (O \ removed) ∪ B ∪ ⋃P ⊨ every formula of `query`.
    pub fn entails_without(&self, removed: &AxiomSet, query: &[Formula]) -> bool {
        let kept = self.kept_indices(removed);
        let mut g = Grounder::new(&self.domain, Overlay::new(&self.vars));
        let refutation = g.refute(query);
        let n = g.vars.num_vars();
        !self.sat(&kept, &refutation, &[], n)
    }

    /// (O \ removed) ∪ B ∪ ⋃P ∪ query breaks a requirement or entails a negative test case.
    pub fn violates_without(&self, removed: &AxiomSet, query: &[Formula]) -> bool {
        !self.report_for(&self.kept_indices(removed), query, true).is_valid()
    }
}

fn formula_reasoner(axioms: &[Axiom], fixed: Vec<&Formula>, extra: &[Formula]) -> Result<Reasoner, GroundError> {
    Reasoner::build(Parts {
        kb: axioms.iter().map(|a| (a.id, &a.formula)).collect(),
        fixed,
        negatives: Vec::new(),
        coherence: false,
        extra,
        budget: 1,
    })
}

/// Satisfiability of the axioms together with the extra formula lists.
pub fn is_consistent(axioms: &[Axiom], extra: &[Vec<Formula>]) -> Result<bool, GroundError> {
    let r = formula_reasoner(axioms, extra.iter().flatten().collect(), &[])?;
    Ok(r.report_for(&(0..axioms.len()).collect::<Vec<_>>(), &[], true).consistent)
}

/// The axioms entail the conjunction of `query`.
pub fn entails(axioms: &[Axiom], query: &[Formula]) -> Result<bool, GroundError> {
    let r = formula_reasoner(axioms, Vec::new(), query)?;
    Ok(r.entails_without(&AxiomSet::new(), query))
}

/// Unary predicates forced to be empty by the axioms.
pub fn is_coherent(axioms: &[Axiom]) -> Result<BTreeSet<String>, GroundError> {
    let r = formula_reasoner(axioms, Vec::new(), &[])?;
    let kept: Vec<usize> = (0..axioms.len()).collect();
    let mut g = Grounder::new(&r.domain, Overlay::new(&r.vars));
    let preds: BTreeSet<String> = axioms.iter().flat_map(|a| a.formula.unary_predicates()).collect();
    let units: Vec<(String, Vec<Clause>)> = preds.into_iter().map(|p| (p.clone(), g.unit(&p, &r.probe))).collect();
    let n = g.vars.num_vars();
    Ok(units.into_iter().filter(|(_, u)| !r.sat(&kept, &[], u, n)).map(|(p, _)| p).collect())
}

/// Requirement and test-case report for (O \ removed) ∪ B ∪ ⋃P.
pub fn check_validity(dpi: &Dpi, removed: &AxiomSet) -> Result<ValidityReport, DpiError> {
    let ids: BTreeSet<AxiomId> = dpi.kb_ids().into_iter().collect();
    if let Some(bad) = removed.iter().find(|id| !ids.contains(id)) {
        return Err(DpiError::UnknownAxiom(*bad));
    }
    Ok(Reasoner::new(dpi)?.report(removed))
}
