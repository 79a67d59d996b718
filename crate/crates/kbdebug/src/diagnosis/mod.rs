//! Minimal conflict sets and minimal diagnoses.

pub mod brute;
pub mod hstree;
pub mod inv;
pub mod qx;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::logic::{AxiomId, AxiomSet, GroundError};

pub use brute::{brute_force_minimal_conflicts, brute_force_minimal_diagnoses, minimal_hitting_sets};
pub use hstree::{hs_tree_diagnoses, HsTree};
pub use inv::{inv_hs_tree, inv_qx, inv_qx_with};
pub use qx::{quick_xplain, quick_xplain_by};

/// Fault probability per kb axiom. Axioms missing from the map count as
/// [`UNIFORM_PROB`].
pub type AxiomProbs = BTreeMap<AxiomId, f64>;

pub const UNIFORM_PROB: f64 = 0.01;

pub fn prob_of(probs: &AxiomProbs, id: AxiomId) -> f64 {
    probs.get(&id).copied().unwrap_or(UNIFORM_PROB)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictSet {
    pub axiom_ids: AxiomSet,
    pub minimal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub axiom_ids: AxiomSet,
    pub prior: f64,
    pub posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagnosisError {
    #[error("no diagnosis exists: background and positive test cases are already invalid")]
    Inadmissible,
    #[error("knowledge base has {size} axioms, exhaustive search is limited to {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Subset order plus a deterministic order on id sequences: smaller sets
/// first, then lexicographic.
pub(crate) fn by_size_then_ids(a: &AxiomSet, b: &AxiomSet) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter()))
}
