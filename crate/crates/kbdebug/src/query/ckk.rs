//! Query search guided by complete Karmarkar-Karp differencing over the
//! diagnosis probabilities: seeds whose probability mass splits evenly are
//! tried first.

use std::collections::HashSet;

use crate::logic::{AxiomSet, Dpi};
use crate::probability::DiagnosisBelief;
use crate::strategy::{compare_candidates, score_entropy};

use super::pool::{check_size, PoolEntry};
use super::{QPartition, QueryContext, QueryError};

#[derive(Clone, Debug)]
struct Part {
    value: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

struct Search<'a> {
    ctx: &'a QueryContext,
    belief: &'a DiagnosisBelief,
    gamma: f64,
    seen: HashSet<QPartition>,
    best: Option<(f64, PoolEntry)>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.best.as_ref().is_some_and(|(s, _)| *s <= self.gamma)
    }

    fn try_seed(&mut self, seed: &[usize]) {
        if seed.is_empty() {
            return;
        }
        let mut sorted = seed.to_vec();
        sorted.sort_unstable();
        let Some((ks, partition)) = self.ctx.seed_partition(&sorted) else { return };
        if !self.seen.insert(partition.clone()) {
            return;
        }
        let score = score_entropy(&partition, self.belief);
        if let Some((b, _)) = &self.best {
            // minimization cannot rescue a strictly worse score
            if score > *b + 1e-12 {
                return;
            }
        }
        let entry = self.ctx.entry(&ks, partition);
        let better = match &self.best {
            None => true,
            Some((b, e)) => compare_candidates(score, &entry, *b, e).is_lt(),
        };
        if better {
            self.best = Some((score, entry));
        }
    }

    fn expand(&mut self, parts: Vec<Part>) {
        if self.done() {
            return;
        }
        if parts.len() == 1 {
            let p = &parts[0];
            self.try_seed(&p.left);
            self.try_seed(&p.right);
            return;
        }
        let (a, b) = (&parts[0], &parts[1]);
        let rest = &parts[2..];
        let differ = Part {
            value: a.value - b.value,
            left: a.left.iter().chain(&b.right).copied().collect(),
            right: a.right.iter().chain(&b.left).copied().collect(),
        };
        let join = Part {
            value: a.value + b.value,
            left: a.left.iter().chain(&b.left).copied().collect(),
            right: a.right.iter().chain(&b.right).copied().collect(),
        };
        for merged in [differ, join] {
            self.expand(insert_sorted(rest, merged));
            if self.done() {
                return;
            }
        }
    }
}

/// Descending by value; a new part goes after equal values.
fn insert_sorted(rest: &[Part], p: Part) -> Vec<Part> {
    let at = rest.iter().position(|q| q.value < p.value).unwrap_or(rest.len());
    let mut out = rest.to_vec();
    out.insert(at, p);
    out
}

impl QueryContext {
    /// Lowest-entropy query found in differencing order, stopping at the
    /// first whose score is at most `gamma`. `None` when no seed yields a
    /// query.
    pub fn ckk(&self, belief: &DiagnosisBelief, gamma: f64) -> Result<Option<PoolEntry>, QueryError> {
        let n = self.leading().len();
        check_size(n)?;
        let mut parts: Vec<Part> =
            (0..n).map(|i| Part { value: belief.probs[i], left: vec![i], right: Vec::new() }).collect();
        parts.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut search = Search { ctx: self, belief, gamma, seen: HashSet::new(), best: None };
        search.expand(parts);
        Ok(search.best.map(|(_, e)| e))
    }
}

pub fn ckk_query_search(
    dpi: &Dpi,
    leading: &[AxiomSet],
    belief: &DiagnosisBelief,
    gamma: f64,
) -> Result<Option<PoolEntry>, QueryError> {
    check_size(leading.len())?;
    QueryContext::new(dpi, leading)?.ckk(belief, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singletons(n: u32) -> Vec<AxiomSet> {
        (1..=n).map(|i| [i].into_iter().collect()).collect()
    }

    #[test]
    fn example1_finds_balanced_query() {
        let dpi = Dpi::from_json(
            r#"{"kb": ["A sub B", "B sub C", "C sub D", "D sub R"], "background": ["A(w)", "(not R)(w)", "A(v)"],
                "entailments": ["assertions"]}"#,
        )
        .unwrap();
        let u = DiagnosisBelief::uniform(4);
        let e = ckk_query_search(&dpi, &singletons(4), &u, 0.1).unwrap().unwrap();
        assert_eq!(e.query.texts(), vec!["C(w)"]);
        assert_eq!(score_entropy(&e.partition, &u), 0.0);
        let any = ckk_query_search(&dpi, &singletons(4), &u, 2.0).unwrap().unwrap();
        assert!(score_entropy(&any.partition, &u) <= 2.0);
    }

    #[test]
    fn example2_with_priors() {
        let dpi = Dpi::from_json(
            r#"{"kb": ["A1 sub (and A2 M1 M2)", "A2 sub (and (not (some s M3)) (some s M2))",
                       "M1 sub (and (not A) B)", "M2 sub (and (all s A) D)", "M3 equiv (or B C)"],
                "background": ["A1(w)", "A1(u)", "s(u,w)"]}"#,
        )
        .unwrap();
        let leading: Vec<AxiomSet> = vec![[1].into(), [3].into(), [4, 5].into(), [2, 4].into()];
        let b = DiagnosisBelief { probs: vec![0.0970, 0.5874, 0.0026, 0.3130], normalized: true };
        let e = ckk_query_search(&dpi, &leading, &b, 0.05).unwrap().unwrap();
        assert_eq!(e.query.texts(), vec!["M1 sub B"]);
        assert!((score_entropy(&e.partition, &b) - 0.022).abs() < 1e-3);
    }
}
