//! Exhaustive subset enumeration, used as a test oracle.

use crate::logic::{AxiomId, AxiomSet, Reasoner};

use super::{by_size_then_ids, DiagnosisError};

pub const BRUTE_FORCE_LIMIT: usize = 16;

fn subsets(ids: &[AxiomId]) -> Result<Vec<AxiomSet>, DiagnosisError> {
    if ids.len() > BRUTE_FORCE_LIMIT {
        return Err(DiagnosisError::TooLarge { size: ids.len(), limit: BRUTE_FORCE_LIMIT });
    }
    let mut all: Vec<AxiomSet> = (0u32..1 << ids.len())
        .map(|mask| ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect())
        .collect();
    all.sort_by(by_size_then_ids);
    Ok(all)
}

/// Keep the subset-minimal members of a list sorted by size.
fn minimal(sorted: Vec<AxiomSet>) -> Vec<AxiomSet> {
    let mut out: Vec<AxiomSet> = Vec::new();
    for s in sorted {
        if !out.iter().any(|m| m.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

/// Every subset-minimal diagnosis, smallest first.
pub fn brute_force_minimal_diagnoses(r: &Reasoner) -> Result<Vec<AxiomSet>, DiagnosisError> {
    let all = subsets(r.kb_ids())?;
    Ok(minimal(all.into_iter().filter(|d| r.valid_without(d)).collect()))
}

/// Every subset-minimal conflict set, smallest first.
pub fn brute_force_minimal_conflicts(r: &Reasoner) -> Result<Vec<AxiomSet>, DiagnosisError> {
    if !r.admissible() {
        return Err(DiagnosisError::Inadmissible);
    }
    let all = subsets(r.kb_ids())?;
    Ok(minimal(all.into_iter().filter(|c| !r.valid_with(c)).collect()))
}

/// Subset-minimal sets over `universe` meeting every member of `sets`.
pub fn minimal_hitting_sets(sets: &[AxiomSet], universe: &[AxiomId]) -> Result<Vec<AxiomSet>, DiagnosisError> {
    let all = subsets(universe)?;
    Ok(minimal(all.into_iter().filter(|h| sets.iter().all(|s| !s.is_disjoint(h))).collect()))
}
