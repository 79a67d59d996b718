//! QuickXplain: divide-and-conquer extraction of a minimal subset that has a
//! monotone property.

use crate::logic::{AxiomId, AxiomSet, Dpi, Reasoner};

use super::{ConflictSet, DiagnosisError};

/// Minimal subset of `candidates` satisfying `holds`, which must be upward
/// closed. `None` when even the full candidate list fails the property.
/// The result keeps the candidates' relative order.
pub fn quick_xplain_by<T: Clone>(candidates: &[T], mut holds: impl FnMut(&[T]) -> bool) -> Option<Vec<T>> {
    if !holds(candidates) {
        return None;
    }
    if candidates.is_empty() || holds(&[]) {
        return Some(Vec::new());
    }
    let mut out = qxp(&mut holds, &[], false, candidates);
    out.sort_by_key(|(i, _)| *i);
    Some(out.into_iter().map(|(_, x)| x).collect())
}

type Indexed<T> = (usize, T);

fn qxp<T: Clone>(
    holds: &mut impl FnMut(&[T]) -> bool,
    background: &[Indexed<T>],
    delta: bool,
    candidates: &[T],
) -> Vec<Indexed<T>> {
    let indexed: Vec<Indexed<T>> = candidates.iter().cloned().enumerate().collect();
    qxp_indexed(holds, background, delta, &indexed)
}

fn qxp_indexed<T: Clone>(
    holds: &mut impl FnMut(&[T]) -> bool,
    background: &[Indexed<T>],
    delta: bool,
    candidates: &[Indexed<T>],
) -> Vec<Indexed<T>> {
    if delta {
        let b: Vec<T> = background.iter().map(|(_, x)| x.clone()).collect();
        if holds(&b) {
            return Vec::new();
        }
    }
    if candidates.len() == 1 {
        return candidates.to_vec();
    }
    let k = candidates.len() / 2;
    let (c1, c2) = candidates.split_at(k);
    let b1: Vec<Indexed<T>> = background.iter().chain(c1).cloned().collect();
    let d2 = qxp_indexed(holds, &b1, !c1.is_empty(), c2);
    let b2: Vec<Indexed<T>> = background.iter().chain(&d2).cloned().collect();
    let d1 = qxp_indexed(holds, &b2, !d2.is_empty(), c1);
    d1.into_iter().chain(d2).collect()
}

/// Minimal conflict among `candidates`, all other kb axioms removed.
pub(crate) fn conflict_among(r: &Reasoner, candidates: &[AxiomId]) -> Option<AxiomSet> {
    quick_xplain_by(candidates, |s| !r.valid_with(&s.iter().copied().collect()))
        .map(|v| v.into_iter().collect())
}

/// A minimal conflict set of the kb, `None` if the kb is already valid.
pub fn quick_xplain(dpi: &Dpi) -> Result<Option<ConflictSet>, DiagnosisError> {
    let r = Reasoner::new(dpi)?;
    if !r.admissible() {
        return Err(DiagnosisError::Inadmissible);
    }
    Ok(conflict_among(&r, r.kb_ids()).map(|axiom_ids| ConflictSet { axiom_ids, minimal: true }))
}
