//! Reiter's hitting-set tree, expanded best-first by path probability.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::logic::{AxiomId, AxiomSet, Reasoner};

use super::qx::conflict_among;
use super::{prob_of, AxiomProbs, DiagnosisError};

#[derive(Debug)]
struct Node {
    path: AxiomSet,
    // product of p/(1-p) over the path, proportional to the path's prior
    weight: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl Ord for Node {
    // BinaryHeap pops the greatest: higher weight, then fewer axioms, then
    // the lexicographically smaller id sequence.
    fn cmp(&self, other: &Self) -> Ordering {
        let w = if close(self.weight, other.weight) {
            Ordering::Equal
        } else {
            self.weight.total_cmp(&other.weight)
        };
        w.then_with(|| other.path.len().cmp(&self.path.len()))
            .then_with(|| other.path.iter().cmp(self.path.iter()))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Incremental best-first enumeration of minimal diagnoses.
pub struct HsTree<'r> {
    r: &'r Reasoner,
    probs: AxiomProbs,
    open: BinaryHeap<Node>,
    visited: HashSet<AxiomSet>,
    conflicts: Vec<AxiomSet>,
    found: Vec<AxiomSet>,
}

impl<'r> HsTree<'r> {
    pub fn new(r: &'r Reasoner, probs: &AxiomProbs) -> Result<HsTree<'r>, DiagnosisError> {
        if !r.admissible() {
            return Err(DiagnosisError::Inadmissible);
        }
        let root = Node { path: AxiomSet::new(), weight: 1.0 };
        Ok(HsTree {
            r,
            probs: probs.clone(),
            visited: HashSet::from([root.path.clone()]),
            open: BinaryHeap::from([root]),
            conflicts: Vec::new(),
            found: Vec::new(),
        })
    }

    /// Minimal conflicts computed so far.
    pub fn conflicts(&self) -> &[AxiomSet] {
        &self.conflicts
    }

    fn weight(&self, path: &AxiomSet) -> f64 {
        path.iter()
            .map(|&id| {
                let p = prob_of(&self.probs, id);
                p / (1.0 - p)
            })
            .product()
    }

    fn is_minimal(&self, path: &AxiomSet) -> bool {
        path.iter().all(|a| {
            let mut smaller = path.clone();
            smaller.remove(a);
            !self.r.valid_without(&smaller)
        })
    }
}

impl Iterator for HsTree<'_> {
    type Item = AxiomSet;

    fn next(&mut self) -> Option<AxiomSet> {
        while let Some(node) = self.open.pop() {
            let h = node.path;
            if self.found.iter().any(|d| d.is_subset(&h)) {
                continue;
            }
            let label = match self.conflicts.iter().find(|c| c.is_disjoint(&h)) {
                Some(c) => c.clone(),
                None => {
                    if self.r.valid_without(&h) {
                        // only reachable non-minimal when some p >= 0.5
                        if self.is_minimal(&h) {
                            self.found.push(h.clone());
                            return Some(h);
                        }
                        continue;
                    }
                    let rest: Vec<AxiomId> = self.r.kb_ids().iter().copied().filter(|a| !h.contains(a)).collect();
                    let c = conflict_among(self.r, &rest).expect("path is not a diagnosis, so its complement conflicts");
                    self.conflicts.push(c.clone());
                    c
                }
            };
            for a in label {
                let mut child = h.clone();
                child.insert(a);
                if self.visited.insert(child.clone()) {
                    let weight = self.weight(&child);
                    self.open.push(Node { path: child, weight });
                }
            }
        }
        None
    }
}

/// Up to `n` minimal diagnoses, most probable first.
pub fn hs_tree_diagnoses(r: &Reasoner, probs: &AxiomProbs, n: usize) -> Result<Vec<AxiomSet>, DiagnosisError> {
    Ok(HsTree::new(r, probs)?.take(n).collect())
}
