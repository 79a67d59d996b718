//! Queries, their partitions of the leading diagnoses, and query search.

pub mod ckk;
pub mod pool;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::logic::syntax::Concept;
use crate::logic::{AxiomSet, Dpi, EntailmentKind, Formula, GroundError, Reasoner};

pub use ckk::ckk_query_search;
pub use pool::{generate_query_pool, minimize_query, QueryPool, POOL_LIMIT};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub formulas: Vec<Formula>,
    pub minimized: bool,
}

impl Query {
    pub fn new(formulas: Vec<Formula>) -> Query {
        Query { formulas, minimized: false }
    }

    pub fn texts(&self) -> Vec<String> {
        self.formulas.iter().map(ToString::to_string).collect()
    }

    /// Formulas in canonical order: assertions before the rest, each group
    /// sorted by text.
    pub fn canonical(&self) -> Vec<String> {
        let mut fs: Vec<&Formula> = self.formulas.iter().collect();
        fs.sort_by(|a, b| formula_order(a, b));
        fs.into_iter().map(ToString::to_string).collect()
    }
}

pub(crate) fn formula_order(a: &Formula, b: &Formula) -> Ordering {
    b.is_assertion().cmp(&a.is_assertion()).then_with(|| a.to_string().cmp(&b.to_string()))
}

/// Indices into the leading diagnoses: those predicting yes, those
/// predicting no, and those with no prediction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QPartition {
    pub d_plus: BTreeSet<usize>,
    pub d_minus: BTreeSet<usize>,
    pub d_zero: BTreeSet<usize>,
}

impl QPartition {
    /// Both answers eliminate at least one diagnosis.
    pub fn is_query(&self) -> bool {
        !self.d_plus.is_empty() && !self.d_minus.is_empty()
    }

    pub fn len(&self) -> usize {
        self.d_plus.len() + self.d_minus.len() + self.d_zero.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("at least two leading diagnoses are needed to discriminate, got {0}")]
    TooFewDiagnoses(usize),
    #[error("{size} leading diagnoses exceed the pool limit of {limit}")]
    TooManyDiagnoses { size: usize, limit: usize },
    #[error("query has no formulas")]
    EmptyQuery,
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Reasoning context for one set of leading diagnoses. The atomic
/// entailments of every O*_i = (O \ D_i) ∪ B ∪ ⋃P are computed once.
pub struct QueryContext {
    dpi: Dpi,
    budget: usize,
    reasoner: Reasoner,
    leading: Vec<AxiomSet>,
    candidates: Vec<Formula>,
    entailed: Vec<BTreeSet<usize>>,
}

fn candidate_entailments(dpi: &Dpi, r: &Reasoner) -> Vec<Formula> {
    let concepts: Vec<&String> = r.concepts().iter().collect();
    let mut out: Vec<Formula> = Vec::new();
    if dpi.entailments.contains(&EntailmentKind::Assertions) {
        for c in &concepts {
            for a in r.individuals() {
                out.push(Formula::ConceptAssertion(Concept::atom(c), a.clone()));
            }
        }
    }
    if dpi.entailments.contains(&EntailmentKind::Subsumptions) {
        for a in &concepts {
            for b in &concepts {
                if a != b {
                    out.push(Formula::Sub(
                        Concept::atom(a),
                        Concept::atom(b),
                    ));
                }
            }
        }
    }
    let everything: AxiomSet = r.kb_ids().iter().copied().collect();
    out.retain(|f| !r.entails_without(&everything, std::slice::from_ref(f)));
    out.sort_by(formula_order);
    out
}

impl QueryContext {
    pub fn new(dpi: &Dpi, leading: &[AxiomSet]) -> Result<QueryContext, QueryError> {
        QueryContext::with_budget(dpi, leading, 1)
    }

    pub fn with_budget(dpi: &Dpi, leading: &[AxiomSet], budget: usize) -> Result<QueryContext, QueryError> {
        let reasoner = Reasoner::with_extra(dpi, &[], budget)?;
        let candidates = candidate_entailments(dpi, &reasoner);
        let entailed = leading
            .iter()
            .map(|d| {
                (0..candidates.len())
                    .filter(|&k| reasoner.entails_without(d, std::slice::from_ref(&candidates[k])))
                    .collect()
            })
            .collect();
        Ok(QueryContext { dpi: dpi.clone(), budget, reasoner, leading: leading.to_vec(), candidates, entailed })
    }

    pub fn leading(&self) -> &[AxiomSet] {
        &self.leading
    }

    pub fn reasoner(&self) -> &Reasoner {
        &self.reasoner
    }

    /// Atomic entailments of O*_i, in canonical order.
    pub fn entailments_of(&self, i: usize) -> Vec<Formula> {
        self.entailed[i].iter().map(|&k| self.candidates[k].clone()).collect()
    }

    /// Atomic entailments shared by every diagnosis of `seed`.
    pub fn common_entailments(&self, seed: &[usize]) -> Vec<Formula> {
        self.common_indices(seed).into_iter().map(|k| self.candidates[k].clone()).collect()
    }

    fn common_indices(&self, seed: &[usize]) -> BTreeSet<usize> {
        let mut it = seed.iter();
        let Some(&first) = it.next() else { return BTreeSet::new() };
        let mut common = self.entailed[first].clone();
        for &i in it {
            common.retain(|k| self.entailed[i].contains(k));
        }
        common
    }

    pub(crate) fn common_candidate_indices(&self, seed: &[usize]) -> Vec<usize> {
        self.common_indices(seed).into_iter().collect()
    }

    pub(crate) fn candidate(&self, k: usize) -> &Formula {
        &self.candidates[k]
    }

    /// Whether O*_i entails every candidate formula in `ks`.
    pub(crate) fn entails_candidates(&self, i: usize, ks: &[usize]) -> bool {
        ks.iter().all(|k| self.entailed[i].contains(k))
    }

    pub(crate) fn violates(&self, i: usize, formulas: &[Formula]) -> bool {
        self.reasoner.violates_without(&self.leading[i], formulas)
    }

    /// Three-way classification of the leading diagnoses for `query`.
    pub fn classify(&self, query: &Query) -> Result<QPartition, QueryError> {
        if query.formulas.is_empty() {
            return Err(QueryError::EmptyQuery);
        }
        if self.reasoner.covers(&query.formulas) {
            return Ok(classify_by(&self.reasoner, &self.leading, &query.formulas));
        }
        let r = Reasoner::with_extra(&self.dpi, &query.formulas, self.budget)?;
        Ok(classify_by(&r, &self.leading, &query.formulas))
    }
}

fn classify_by(r: &Reasoner, leading: &[AxiomSet], formulas: &[Formula]) -> QPartition {
    let mut q = QPartition::default();
    for (i, d) in leading.iter().enumerate() {
        if r.entails_without(d, formulas) {
            q.d_plus.insert(i);
        } else if r.violates_without(d, formulas) {
            q.d_minus.insert(i);
        } else {
            q.d_zero.insert(i);
        }
    }
    q
}

/// Three-way classification of `leading` for `query` against `dpi`.
pub fn classify_partition(dpi: &Dpi, query: &Query, leading: &[AxiomSet]) -> Result<QPartition, QueryError> {
    if query.formulas.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    let r = Reasoner::with_extra(dpi, &query.formulas, 1)?;
    Ok(classify_by(&r, leading, &query.formulas))
}

/// Atomic entailments shared by the solution KBs of every diagnosis in `seed`.
pub fn common_entailments(dpi: &Dpi, seed: &[AxiomSet]) -> Result<Vec<Formula>, QueryError> {
    let ctx = QueryContext::new(dpi, seed)?;
    let all: Vec<usize> = (0..seed.len()).collect();
    Ok(ctx.common_entailments(&all))
}
