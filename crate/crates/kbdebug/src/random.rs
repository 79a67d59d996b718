//! Seeded random instances: Horn-style subsumptions, negative inclusions
//! and disjointness over a handful of concepts, with assertional
//! background. Used by the property suites and the acceptance run.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{Dpi, DpiEnvelope, EntailmentKind, Reasoner, Requirement, TestCaseEnvelope};

#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub max_kb: usize,
    pub concepts: usize,
    pub individuals: usize,
}

impl Default for RandomSpec {
    fn default() -> RandomSpec {
        RandomSpec { max_kb: 8, concepts: 5, individuals: 2 }
    }
}

fn concept(rng: &mut impl Rng, spec: &RandomSpec) -> String {
    format!("C{}", rng.gen_range(0..spec.concepts))
}

fn individual(rng: &mut impl Rng, spec: &RandomSpec) -> String {
    ["a", "b", "c", "d"][rng.gen_range(0..spec.individuals.clamp(1, 4))].to_string()
}

fn two(rng: &mut impl Rng, spec: &RandomSpec) -> (String, String) {
    loop {
        let (x, y) = (concept(rng, spec), concept(rng, spec));
        if x != y {
            return (x, y);
        }
    }
}

fn axiom(rng: &mut impl Rng, spec: &RandomSpec) -> String {
    let (x, y) = two(rng, spec);
    match rng.gen_range(0..10) {
        0..=4 => format!("{x} sub {y}"),
        5 | 6 => format!("{x} sub (not {y})"),
        7 => format!("disjoint {x} {y}"),
        8 => {
            let z = concept(rng, spec);
            format!("(and {x} {z}) sub {y}")
        }
        _ => format!("{x}({})", individual(rng, spec)),
    }
}

/// An admissible instance with 1..=`max_kb` kb axioms. Roughly one in
/// four gets a negative test case, one in five the coherence requirement.
pub fn random_dpi(rng: &mut impl Rng, spec: &RandomSpec) -> Dpi {
    loop {
        let n = rng.gen_range(1..=spec.max_kb.max(1));
        let kb: Vec<String> = (0..n).map(|_| axiom(rng, spec)).collect();
        let mut background: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            background.push(format!("{}({})", concept(rng, spec), individual(rng, spec)));
        }
        let mut negative_tests = Vec::new();
        if rng.gen_bool(0.25) {
            let c = concept(rng, spec);
            let i = individual(rng, spec);
            negative_tests.push(TestCaseEnvelope::Plain(vec![format!("{c}({i})")]));
        }
        let mut requirements = vec![Requirement::Consistency];
        if rng.gen_bool(0.2) {
            requirements.push(Requirement::Coherence);
        }
        background.shuffle(rng);
        let env = DpiEnvelope {
            kb,
            background,
            positive_tests: Vec::new(),
            negative_tests,
            requirements,
            entailments: vec![EntailmentKind::Assertions, EntailmentKind::Subsumptions],
        };
        let Ok(dpi) = Dpi::from_envelope(&env) else { continue };
        match Reasoner::new(&dpi) {
            Ok(r) if r.admissible() => return dpi,
            _ => continue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_admissible_and_reproducible() {
        let spec = RandomSpec::default();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = random_dpi(&mut a, &spec);
            assert!(Reasoner::new(&d).unwrap().admissible());
            assert!(!d.kb.is_empty() && d.kb.len() <= spec.max_kb);
            assert_eq!(d, random_dpi(&mut b, &spec));
        }
    }
}
