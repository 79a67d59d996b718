//! Exhaustive query generation over all seed subsets of the leading
//! diagnoses, with partition-preserving minimization.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::diagnosis::quick_xplain_by;
use crate::logic::{AxiomSet, Dpi, Formula};

use super::{QPartition, Query, QueryContext, QueryError};

pub const POOL_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub query: Query,
    pub partition: QPartition,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryPool {
    pub entries: Vec<PoolEntry>,
}

impl QueryPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn seed_of(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

impl QueryContext {
    /// Partition of the query made of candidate formulas `ks`.
    pub(crate) fn classify_candidates(&self, ks: &[usize]) -> QPartition {
        let formulas: Vec<Formula> = ks.iter().map(|&k| self.candidate(k).clone()).collect();
        let mut q = QPartition::default();
        for i in 0..self.leading().len() {
            if self.entails_candidates(i, ks) {
                q.d_plus.insert(i);
            } else if self.violates(i, &formulas) {
                q.d_minus.insert(i);
            } else {
                q.d_zero.insert(i);
            }
        }
        q
    }

    /// Smallest subset of candidate formulas `ks` keeping `partition`:
    /// D− members must still be refuted, D0 members must still not entail
    /// it. D+ members entail every subset anyway.
    pub(crate) fn minimize_candidates(&self, ks: &[usize], partition: &QPartition) -> Vec<usize> {
        quick_xplain_by(ks, |sub| {
            let formulas: Vec<Formula> = sub.iter().map(|&k| self.candidate(k).clone()).collect();
            partition.d_zero.iter().all(|&i| !self.entails_candidates(i, sub))
                && partition.d_minus.iter().all(|&i| !formulas.is_empty() && self.violates(i, &formulas))
        })
        .unwrap_or_else(|| ks.to_vec())
    }

    /// Unminimized candidate indices and partition for one seed, if the
    /// seed yields a query.
    pub(crate) fn seed_partition(&self, seed: &[usize]) -> Option<(Vec<usize>, QPartition)> {
        let ks = self.common_candidate_indices(seed);
        if ks.is_empty() {
            return None;
        }
        let partition = self.classify_candidates(&ks);
        partition.is_query().then_some((ks, partition))
    }

    pub(crate) fn entry(&self, ks: &[usize], partition: QPartition) -> PoolEntry {
        let min = self.minimize_candidates(ks, &partition);
        let formulas = min.iter().map(|&k| self.candidate(k).clone()).collect();
        PoolEntry { query: Query { formulas, minimized: true }, partition }
    }

    pub fn pool(&self) -> Result<QueryPool, QueryError> {
        let n = self.leading().len();
        check_size(n)?;
        let mut seen: HashSet<QPartition> = HashSet::new();
        let mut pool = QueryPool::default();
        for mask in 1u64..1 << n {
            let Some((ks, partition)) = self.seed_partition(&seed_of(mask, n)) else { continue };
            if seen.insert(partition.clone()) {
                pool.entries.push(self.entry(&ks, partition));
            }
        }
        Ok(pool)
    }
}

pub(crate) fn check_size(n: usize) -> Result<(), QueryError> {
    if n < 2 {
        return Err(QueryError::TooFewDiagnoses(n));
    }
    if n > POOL_LIMIT {
        return Err(QueryError::TooManyDiagnoses { size: n, limit: POOL_LIMIT });
    }
    Ok(())
}

/// One minimized query per distinct partition reachable from a seed subset
/// of `leading`.
pub fn generate_query_pool(dpi: &Dpi, leading: &[AxiomSet]) -> Result<QueryPool, QueryError> {
    check_size(leading.len())?;
    QueryContext::new(dpi, leading)?.pool()
}

/// Subset-minimal sub-query with the same partition over `leading`.
pub fn minimize_query(
    dpi: &Dpi,
    leading: &[AxiomSet],
    query: &Query,
    partition: &QPartition,
) -> Result<Query, QueryError> {
    let ctx = QueryContext::new(dpi, leading)?;
    let preserved = |sub: &[Formula]| -> Result<bool, QueryError> {
        if sub.is_empty() {
            return Ok(false);
        }
        Ok(ctx.classify(&Query::new(sub.to_vec()))? == *partition)
    };
    let mut failure = None;
    let min = quick_xplain_by(&query.formulas, |sub| match preserved(sub) {
        Ok(b) => b,
        Err(e) => {
            failure = Some(e);
            false
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Query { formulas: min.unwrap_or_else(|| query.formulas.clone()), minimized: true })
}
