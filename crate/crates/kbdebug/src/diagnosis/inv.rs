//! Direct diagnosis computation: Inv-QX finds one minimal diagnosis, the
//! inverse tree enumerates several of them in linear memory.

use std::collections::HashSet;

use crate::logic::{AxiomId, AxiomSet, Dpi, Reasoner};

use super::{prob_of, AxiomProbs, Diagnosis, DiagnosisError};

/// One minimal diagnosis that leaves every axiom of `keep` in place, or
/// `None` when no such diagnosis exists. Candidates are tried in descending
/// fault probability, ties in kb order.
pub fn inv_qx_with(r: &Reasoner, keep: &AxiomSet, probs: &AxiomProbs) -> Option<AxiomSet> {
    let mut candidates: Vec<AxiomId> = r.kb_ids().iter().copied().filter(|a| !keep.contains(a)).collect();
    candidates.sort_by(|a, b| prob_of(probs, *b).total_cmp(&prob_of(probs, *a)));
    let all: AxiomSet = candidates.iter().copied().collect();
    if !r.valid_without(&all) {
        return None;
    }
    Some(find_diag(r, &AxiomSet::new(), !candidates.is_empty(), &candidates))
}

fn find_diag(r: &Reasoner, d: &AxiomSet, delta: bool, candidates: &[AxiomId]) -> AxiomSet {
    if delta && r.valid_without(d) {
        return AxiomSet::new();
    }
    if candidates.len() == 1 {
        return candidates.iter().copied().collect();
    }
    let k = candidates.len() / 2;
    let (o1, o2) = candidates.split_at(k);
    let d2 = find_diag(r, &d.iter().chain(o1).copied().collect(), !o1.is_empty(), o2);
    let d1 = find_diag(r, &d.union(&d2).copied().collect(), !d2.is_empty(), o1);
    d1.union(&d2).copied().collect()
}

/// A minimal diagnosis of the DPI, `None` when no diagnosis exists.
pub fn inv_qx(dpi: &Dpi, probs: &AxiomProbs) -> Result<Option<Diagnosis>, DiagnosisError> {
    let r = Reasoner::new(dpi)?;
    Ok(inv_qx_with(&r, &AxiomSet::new(), probs).map(|axiom_ids| Diagnosis { axiom_ids, prior: 0.0, posterior: 0.0 }))
}

/// Up to `m` minimal diagnoses by depth-first expansion of a tree whose
/// nodes are labelled with diagnoses and whose edges keep axioms fixed.
/// `seeds` must be minimal diagnoses of the current instance; they are
/// reused before anything new is computed.
pub fn inv_hs_tree(r: &Reasoner, probs: &AxiomProbs, m: usize, seeds: &[AxiomSet]) -> Vec<AxiomSet> {
    let mut pool: Vec<AxiomSet> = seeds.to_vec();
    let mut out: Vec<AxiomSet> = Vec::new();
    let mut stack = vec![AxiomSet::new()];
    let mut visited: HashSet<AxiomSet> = HashSet::from([AxiomSet::new()]);
    while out.len() < m {
        let Some(h) = stack.pop() else { break };
        let label = match pool.iter().find(|d| d.is_disjoint(&h)) {
            Some(d) => d.clone(),
            None => match inv_qx_with(r, &h, probs) {
                Some(d) => {
                    pool.push(d.clone());
                    d
                }
                None => continue,
            },
        };
        if !out.contains(&label) {
            out.push(label.clone());
        }
        for &a in label.iter().rev() {
            let mut child = h.clone();
            child.insert(a);
            if visited.insert(child.clone()) {
                stack.push(child);
            }
        }
    }
    out
}
