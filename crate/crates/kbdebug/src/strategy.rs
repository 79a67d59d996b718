//! Query scoring and selection: split-in-half, entropy, random, and the
//! RIO cautiousness learner.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::probability::{answer_likelihood, DiagnosisBelief};
use crate::query::pool::PoolEntry;
use crate::query::{Answer, QPartition, QueryPool};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RioState {
    #[serde(default = "RioState::default_c")]
    pub c: f64,
    #[serde(default)]
    pub c_min: f64,
    #[serde(default = "RioState::default_c_max")]
    pub c_max: f64,
    #[serde(default = "RioState::default_epsilon")]
    pub epsilon: f64,
}

impl RioState {
    fn default_c() -> f64 {
        0.25
    }

    fn default_c_max() -> f64 {
        4.0 / 9.0
    }

    fn default_epsilon() -> f64 {
        0.25
    }
}

impl Default for RioState {
    fn default() -> RioState {
        RioState { c: 0.25, c_min: 0.0, c_max: 4.0 / 9.0, epsilon: 0.25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StrategyChoice {
    Random {
        #[serde(default)]
        seed: u64,
    },
    Split,
    Entropy,
    Rio(RioState),
}

impl Default for StrategyChoice {
    fn default() -> StrategyChoice {
        StrategyChoice::Entropy
    }
}

impl StrategyChoice {
    pub fn short_name(&self) -> &'static str {
        match self {
            StrategyChoice::Random { .. } => "rnd",
            StrategyChoice::Split => "spl",
            StrategyChoice::Entropy => "ent",
            StrategyChoice::Rio(_) => "rio",
        }
    }
}

impl fmt::Display for StrategyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for StrategyChoice {
    type Err = String;

    /// Accepts `ent`, `spl`, `rio`, `rnd` and their long names.
    fn from_str(s: &str) -> Result<StrategyChoice, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ent" | "entropy" => Ok(StrategyChoice::Entropy),
            "spl" | "split" => Ok(StrategyChoice::Split),
            "rio" => Ok(StrategyChoice::Rio(RioState::default())),
            "rnd" | "random" => Ok(StrategyChoice::Random { seed: 0 }),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("query pool is empty")]
    EmptyPool,
}

/// ||D+| − |D−|| + |D0|
pub fn score_split(partition: &QPartition) -> f64 {
    (partition.d_plus.len() as f64 - partition.d_minus.len() as f64).abs() + partition.d_zero.len() as f64
}

/// Σ_v p(q=v) log₂ p(q=v) + p(D0) + 1, with 0·log 0 = 0.
pub fn score_entropy(partition: &QPartition, belief: &DiagnosisBelief) -> f64 {
    let (yes, no) = answer_likelihood(partition, belief);
    let plogp = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
    let zero = belief.sum_of(partition.d_zero.iter().copied());
    (plogp(yes) + plogp(no) + zero + 1.0).max(0.0)
}

/// min(|D+|, |D−|) / |D|
pub fn query_cautiousness(partition: &QPartition, leading_count: usize) -> f64 {
    partition.d_plus.len().min(partition.d_minus.len()) as f64 / leading_count as f64
}

/// Share of the leading diagnoses eliminated by `answer`.
pub fn elimination_rate(partition: &QPartition, answer: Answer, leading_count: usize) -> f64 {
    let gone = match answer {
        Answer::Yes => partition.d_minus.len(),
        Answer::No => partition.d_plus.len(),
    };
    gone as f64 / leading_count as f64
}

pub fn rio_update(state: &RioState, partition: &QPartition, answer: Answer, leading_count: usize) -> RioState {
    let n = leading_count as f64;
    let adj = (n / 2.0 - state.epsilon).floor() / n - elimination_rate(partition, answer, leading_count);
    let c = (state.c + 2.0 * (state.c_max - state.c_min) * adj).clamp(state.c_min, state.c_max);
    RioState { c, ..*state }
}

const SCORE_TOL: f64 = 1e-12;

/// Selection order: lower score, then fewer formulas, then the canonical
/// formula sequence.
pub fn compare_candidates(sa: f64, a: &PoolEntry, sb: f64, b: &PoolEntry) -> Ordering {
    let by_score = if (sa - sb).abs() <= SCORE_TOL { Ordering::Equal } else { sa.total_cmp(&sb) };
    by_score
        .then_with(|| a.query.formulas.len().cmp(&b.query.formulas.len()))
        .then_with(|| a.query.canonical().cmp(&b.query.canonical()))
}

fn argmin_by(entries: &[&PoolEntry], score: impl Fn(&PoolEntry) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in entries.iter().enumerate() {
        let s = score(e);
        match best {
            Some((j, sj)) if compare_candidates(s, e, sj, entries[j]) != Ordering::Less => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the pool entry chosen by `choice`. `step` varies the random
/// strategy's draw between successive queries of one session.
pub fn select_query(
    pool: &QueryPool,
    belief: &DiagnosisBelief,
    choice: &StrategyChoice,
    step: u64,
) -> Result<usize, StrategyError> {
    if pool.is_empty() {
        return Err(StrategyError::EmptyPool);
    }
    let all: Vec<&PoolEntry> = pool.entries.iter().collect();
    let entropy = |e: &PoolEntry| score_entropy(&e.partition, belief);
    let picked = match choice {
        StrategyChoice::Split => argmin_by(&all, |e| score_split(&e.partition)),
        StrategyChoice::Entropy => argmin_by(&all, entropy),
        StrategyChoice::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(step.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            Some(rng.gen_range(0..all.len()))
        }
        StrategyChoice::Rio(state) => {
            let n = belief.probs.len();
            let qc = |e: &PoolEntry| query_cautiousness(&e.partition, n);
            let best = argmin_by(&all, entropy).expect("pool is not empty");
            if qc(all[best]) + SCORE_TOL >= state.c {
                Some(best)
            } else {
                let safe: Vec<usize> = (0..all.len()).filter(|&i| qc(all[i]) + SCORE_TOL >= state.c).collect();
                match safe.iter().map(|&i| qc(all[i])).reduce(f64::min) {
                    None => Some(best),
                    Some(least) => {
                        let cautious: Vec<usize> =
                            safe.into_iter().filter(|&i| (qc(all[i]) - least).abs() <= SCORE_TOL).collect();
                        let subset: Vec<&PoolEntry> = cautious.iter().map(|&i| all[i]).collect();
                        argmin_by(&subset, entropy).map(|k| cautious[k])
                    }
                }
            }
        }
    };
    Ok(picked.expect("pool is not empty"))
}
