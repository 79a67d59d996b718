//! Axiom fault probabilities, diagnosis priors and Bayesian updates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnosis::{prob_of, AxiomProbs};
use crate::logic::{Axiom, AxiomId, AxiomSet, SyntaxElement};
use crate::query::{Answer, QPartition};

fn default_axiom_prob() -> f64 {
    0.001
}

/// Fault rates per syntax element. `axioms` pins the probability of single
/// axioms by id and takes precedence over the element rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultModel {
    #[serde(default)]
    pub elements: BTreeMap<SyntaxElement, f64>,
    #[serde(default = "default_axiom_prob")]
    pub default: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub axioms: BTreeMap<AxiomId, f64>,
}

impl Default for FaultModel {
    fn default() -> FaultModel {
        FaultModel { elements: BTreeMap::new(), default: default_axiom_prob(), axioms: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbabilityError {
    #[error("probability {0} outside [0, 1)")]
    OutOfRange(f64),
    #[error("the answer contradicts every diagnosis")]
    Contradiction,
    #[error("cannot normalize a belief without positive entries")]
    AllZero,
}

impl FaultModel {
    pub fn validate(&self) -> Result<(), ProbabilityError> {
        let all = self.elements.values().chain(self.axioms.values()).chain([&self.default]);
        match all.copied().find(|p| !(0.0..1.0).contains(p)) {
            Some(p) => Err(ProbabilityError::OutOfRange(p)),
            None => Ok(()),
        }
    }
}

/// 1 − ∏(1 − F_se)^c(se) over the axiom's operator census. Elements absent
/// from the model count as 0; an axiom none of whose elements the model
/// covers gets the model default.
pub fn axiom_fault_prob(axiom: &Axiom, model: &FaultModel) -> f64 {
    if let Some(&p) = model.axioms.get(&axiom.id) {
        return p;
    }
    let covered = axiom.syntax_counts.iter().any(|(se, &c)| c > 0 && model.elements.contains_key(se));
    if !covered {
        return model.default;
    }
    let keep: f64 = axiom
        .syntax_counts
        .iter()
        .map(|(se, &c)| (1.0 - model.elements.get(se).copied().unwrap_or(0.0)).powi(c as i32))
        .product();
    1.0 - keep
}

pub fn axiom_probs(kb: &[Axiom], model: &FaultModel) -> AxiomProbs {
    kb.iter().map(|a| (a.id, axiom_fault_prob(a, model))).collect()
}

/// ∏_{D} p(ax) · ∏_{O \ D} (1 − p(ax)), not normalized.
pub fn diagnosis_prior(diag: &AxiomSet, kb: &[AxiomId], probs: &AxiomProbs) -> f64 {
    kb.iter()
        .map(|&id| {
            let p = prob_of(probs, id);
            if diag.contains(&id) {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

/// Probabilities aligned with a list of leading diagnoses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisBelief {
    pub probs: Vec<f64>,
    pub normalized: bool,
}

impl DiagnosisBelief {
    pub fn new(probs: Vec<f64>) -> DiagnosisBelief {
        DiagnosisBelief { probs, normalized: false }
    }

    pub fn uniform(n: usize) -> DiagnosisBelief {
        DiagnosisBelief { probs: vec![1.0 / n as f64; n], normalized: true }
    }

    pub fn sum_of(&self, idx: impl IntoIterator<Item = usize>) -> f64 {
        idx.into_iter().map(|i| self.probs[i]).sum()
    }

    pub fn normalize(&self) -> Result<DiagnosisBelief, ProbabilityError> {
        normalize(self)
    }
}

pub fn normalize(belief: &DiagnosisBelief) -> Result<DiagnosisBelief, ProbabilityError> {
    let total: f64 = belief.probs.iter().sum();
    if !(total > 0.0) {
        return Err(ProbabilityError::AllZero);
    }
    Ok(DiagnosisBelief { probs: belief.probs.iter().map(|p| p / total).collect(), normalized: true })
}

/// (p(yes), p(no)) with p(yes) = p(D+) + p(D0)/2.
pub fn answer_likelihood(partition: &QPartition, belief: &DiagnosisBelief) -> (f64, f64) {
    let yes = belief.sum_of(partition.d_plus.iter().copied()) + belief.sum_of(partition.d_zero.iter().copied()) / 2.0;
    let no = belief.sum_of(partition.d_minus.iter().copied()) + belief.sum_of(partition.d_zero.iter().copied()) / 2.0;
    let total = yes + no;
    if total > 0.0 {
        (yes / total, 1.0 - yes / total)
    } else {
        (0.5, 0.5)
    }
}

/// p(answer | D_i): 1 if D_i predicts it, 0 if D_i is refuted, ½ otherwise.
pub fn answer_factor(partition: &QPartition, index: usize, answer: Answer) -> f64 {
    let (agree, refute) = match answer {
        Answer::Yes => (&partition.d_plus, &partition.d_minus),
        Answer::No => (&partition.d_minus, &partition.d_plus),
    };
    if agree.contains(&index) {
        1.0
    } else if refute.contains(&index) {
        0.0
    } else {
        0.5
    }
}

pub fn bayes_update(
    belief: &DiagnosisBelief,
    partition: &QPartition,
    answer: Answer,
) -> Result<DiagnosisBelief, ProbabilityError> {
    let scaled: Vec<f64> =
        belief.probs.iter().enumerate().map(|(i, p)| p * answer_factor(partition, i, answer)).collect();
    normalize(&DiagnosisBelief::new(scaled)).map_err(|_| ProbabilityError::Contradiction)
}
