//! Complete DPLL search with unit propagation over two watched literals,
//! first-UIP clause learning and non-chronological backjumping.
//!
//! Literals use the DIMACS convention: variable `v >= 1`, `-v` is its negation.

const NONE: usize = usize::MAX;

#[inline]
fn code(lit: i32) -> usize {
    let v = lit.unsigned_abs() as usize - 1;
    2 * v + usize::from(lit < 0)
}

#[inline]
fn var_of(c: usize) -> usize {
    c >> 1
}

pub struct Solver {
    clauses: Vec<Vec<usize>>,
    watches: Vec<Vec<usize>>,
    value: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<usize>,
    trail: Vec<usize>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    bump: f64,
    unsat: bool,
}

impl Solver {
    pub fn new(num_vars: usize) -> Solver {
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            value: vec![0; num_vars],
            level: vec![0; num_vars],
            reason: vec![NONE; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            bump: 1.0,
            unsat: false,
        }
    }

    fn ensure_var(&mut self, v: usize) {
        if v >= self.value.len() {
            self.value.resize(v + 1, 0);
            self.level.resize(v + 1, 0);
            self.reason.resize(v + 1, NONE);
            self.activity.resize(v + 1, 0.0);
            self.watches.resize(2 * (v + 1), Vec::new());
        }
    }

    #[inline]
    fn lit_value(&self, c: usize) -> i8 {
        let v = self.value[var_of(c)];
        if c & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, c: usize, reason: usize) {
        let v = var_of(c);
        self.value[v] = if c & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.trail_lim.len();
        self.reason[v] = reason;
        self.trail.push(c);
    }

    /// Add a clause at decision level 0.
    pub fn add_clause(&mut self, lits: &[i32]) {
        if self.unsat {
            return;
        }
        let mut c: Vec<usize> = Vec::with_capacity(lits.len());
        for &l in lits {
            debug_assert!(l != 0);
            self.ensure_var(l.unsigned_abs() as usize - 1);
            let x = code(l);
            if c.contains(&(x ^ 1)) {
                return;
            }
            if !c.contains(&x) {
                c.push(x);
            }
        }
        // drop literals already false at level 0, satisfied clauses vanish
        if c.iter().any(|&x| self.lit_value(x) == 1) {
            return;
        }
        c.retain(|&x| self.lit_value(x) == 0);
        match c.len() {
            0 => self.unsat = true,
            1 => {
                self.assign(c[0], NONE);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                let idx = self.clauses.len();
                self.watches[c[0]].push(idx);
                self.watches[c[1]].push(idx);
                self.clauses.push(c);
            }
        }
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let ws = std::mem::take(&mut self.watches[false_lit]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                if conflict.is_some() {
                    kept.push(ci);
                    continue;
                }
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.lit_value(first) == 1 {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[ci].len() {
                    let x = self.clauses[ci][k];
                    if self.lit_value(x) != -1 {
                        self.clauses[ci].swap(1, k);
                        self.watches[x].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if self.lit_value(first) == -1 {
                    conflict = Some(ci);
                } else {
                    self.assign(first, ci);
                }
            }
            self.watches[false_lit] = kept;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn analyze(&mut self, mut clause: usize) -> (Vec<usize>, usize) {
        let n = self.value.len();
        let mut seen = vec![false; n];
        let mut learnt = vec![NONE];
        let mut counter = 0;
        let mut p = NONE;
        let mut idx = self.trail.len();
        let cur = self.trail_lim.len();
        loop {
            let lits = self.clauses[clause].clone();
            for &q in &lits {
                if p != NONE && var_of(q) == var_of(p) {
                    continue;
                }
                let v = var_of(q);
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    self.activity[v] += self.bump;
                    if self.level[v] >= cur {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if seen[var_of(self.trail[idx])] {
                    break;
                }
            }
            p = self.trail[idx];
            seen[var_of(p)] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            clause = self.reason[var_of(p)];
        }
        learnt[0] = p ^ 1;
        let mut bj = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for i in 1..learnt.len() {
                if self.level[var_of(learnt[i])] > self.level[var_of(learnt[best])] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            bj = self.level[var_of(learnt[1])];
        }
        self.bump *= 1.05;
        if self.bump > 1e100 {
            self.activity.iter_mut().for_each(|a| *a *= 1e-100);
            self.bump *= 1e-100;
        }
        (learnt, bj)
    }

    fn backtrack(&mut self, lvl: usize) {
        if self.trail_lim.len() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for &c in &self.trail[start..] {
            let v = var_of(c);
            self.value[v] = 0;
            self.reason[v] = NONE;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = start;
    }

    fn pick(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.value.len() {
            if self.value[v] == 0 && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best
    }

    /// Decide satisfiability of the clauses added so far.
    pub fn solve(&mut self) -> bool {
        if self.unsat {
            return false;
        }
        if self.propagate().is_some() {
            self.unsat = true;
            return false;
        }
        loop {
            if let Some(confl) = self.propagate() {
                if self.trail_lim.is_empty() {
                    self.unsat = true;
                    return false;
                }
                let (learnt, bj) = self.analyze(confl);
                self.backtrack(bj);
                if learnt.len() == 1 {
                    self.assign(learnt[0], NONE);
                } else {
                    let idx = self.clauses.len();
                    self.watches[learnt[0]].push(idx);
                    self.watches[learnt[1]].push(idx);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.assign(first, idx);
                }
            } else {
                match self.pick() {
                    None => return true,
                    Some(v) => {
                        self.trail_lim.push(self.trail.len());
                        self.assign(2 * v + 1, NONE);
                    }
                }
            }
        }
    }

    /// Truth value of variable `v` (1-based) in the last model found.
    pub fn model_value(&self, v: usize) -> Option<bool> {
        match self.value.get(v - 1) {
            Some(1) => Some(true),
            Some(-1) => Some(false),
            _ => None,
        }
    }
}

/// Satisfiability of a clause set over variables `1..=num_vars`.
pub fn satisfiable<'a, I>(num_vars: usize, clauses: I) -> bool
where
    I: IntoIterator<Item = &'a [i32]>,
{
    let mut s = Solver::new(num_vars);
    for c in clauses {
        s.add_clause(c);
        if s.unsat {
            return false;
        }
    }
    s.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: usize, clauses: &[Vec<i32>]) -> bool {
        (0u32..(1 << n)).any(|m| {
            clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = m >> (l.unsigned_abs() - 1) & 1 == 1;
                    if l > 0 {
                        bit
                    } else {
                        !bit
                    }
                })
            })
        })
    }

    fn sat(n: usize, clauses: &[Vec<i32>]) -> bool {
        satisfiable(n, clauses.iter().map(|c| c.as_slice()))
    }

    #[test]
    fn trivial_cases() {
        assert!(sat(0, &[]));
        assert!(!sat(1, &[vec![]]));
        assert!(!sat(1, &[vec![1], vec![-1]]));
        assert!(sat(2, &[vec![1, 2], vec![-1]]));
    }

    #[test]
    fn pigeonhole_three_into_two() {
        // p(i,j): pigeon i in hole j, var = 2*i + j + 1
        let v = |i: i32, j: i32| 2 * i + j + 1;
        let mut cs = Vec::new();
        for i in 0..3 {
            cs.push(vec![v(i, 0), v(i, 1)]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cs.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        assert!(!sat(6, &cs));
    }

    #[test]
    fn model_satisfies_clauses() {
        let cs = vec![vec![1, 2, -3], vec![-1, 3], vec![-2, 3], vec![-3, -4], vec![4, 1]];
        let mut s = Solver::new(4);
        for c in &cs {
            s.add_clause(c);
        }
        assert!(s.solve());
        for c in &cs {
            assert!(c.iter().any(|&l| s.model_value(l.unsigned_abs() as usize) == Some(l > 0)));
        }
    }

    proptest! {
        #[test]
        fn agrees_with_truth_tables(
            n in 1usize..8,
            raw in prop::collection::vec(prop::collection::vec((1i32..8, any::<bool>()), 1..4), 0..30)
        ) {
            let clauses: Vec<Vec<i32>> = raw
                .into_iter()
                .map(|c| c.into_iter().map(|(v, s)| {
                    let v = (v - 1) % n as i32 + 1;
                    if s { v } else { -v }
                }).collect())
                .collect();
            prop_assert_eq!(sat(n, &clauses), brute(n, &clauses));
        }
    }
}
