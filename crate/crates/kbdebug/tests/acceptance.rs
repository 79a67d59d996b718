//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A few printed reference values cannot be reproduced from the formulas
//! they are supposed to come from. Those sub-checks are marked `conflict`;
//! they still turn their line into FAIL, but only an unexpected failure
//! makes the process exit non-zero.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use kbdebug::diagnosis::{
    brute_force_minimal_conflicts, brute_force_minimal_diagnoses, hs_tree_diagnoses, inv_hs_tree, inv_qx, minimal_hitting_sets,
    quick_xplain, AxiomProbs,
};
use kbdebug::logic::{parse_formula, AxiomSet, Dpi, Reasoner};
use kbdebug::probability::{answer_likelihood, axiom_fault_prob, axiom_probs, bayes_update, diagnosis_prior, DiagnosisBelief, FaultModel};
use kbdebug::query::{minimize_query, Answer, QPartition, Query, QueryContext};
use kbdebug::random::{random_dpi, RandomSpec};
use kbdebug::session::{
    pose_query, run_batch, start_session, submit_answer, Engine, Mode, Reply, SessionConfig, SessionState, SessionStatus,
};
use kbdebug::strategy::{query_cautiousness, rio_update, score_entropy, RioState, StrategyChoice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-3;

#[derive(Default)]
struct Check {
    failed: Vec<String>,
    conflicts: Vec<String>,
}

impl Check {
    fn ok(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.failed.push(what.into());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, got: T, want: T, what: &str) {
        if got != want {
            self.failed.push(format!("{what}: got {got:?}, want {want:?}"));
        }
    }

    fn close(&mut self, got: &[f64], want: &[f64], what: &str) {
        if !close(got, want) {
            self.failed.push(format!("{what}: got {}, want {}", fmt(got), fmt(want)));
        }
    }

    fn known(&mut self, what: impl Into<String>) {
        self.conflicts.push(what.into());
    }

    /// A printed value the formulas do not produce.
    fn conflict(&mut self, got: &[f64], want: &[f64], what: &str) {
        if !close(got, want) {
            self.conflicts.push(format!("{what}: got {}, printed {}", fmt(got), fmt(want)));
        }
    }
}

fn close(got: &[f64], want: &[f64]) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= TOL)
}

fn fmt(v: &[f64]) -> String {
    format!("({})", v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", "))
}

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn fixture(name: &str) -> Dpi {
    Dpi::from_json(&fixture_text(name)).unwrap()
}

fn faults(name: &str) -> FaultModel {
    serde_json::from_str(&fixture_text(name)).unwrap()
}

fn set(ids: &[u32]) -> AxiomSet {
    ids.iter().copied().collect()
}

fn sets(v: &[&[u32]]) -> Vec<AxiomSet> {
    v.iter().map(|s| set(s)).collect()
}

fn sorted(mut v: Vec<AxiomSet>) -> Vec<AxiomSet> {
    v.sort();
    v
}

fn part(plus: &[usize], minus: &[usize], zero: &[usize]) -> QPartition {
    QPartition { d_plus: plus.iter().copied().collect(), d_minus: minus.iter().copied().collect(), d_zero: zero.iter().copied().collect() }
}

fn query(texts: &[&str]) -> Query {
    Query::new(texts.iter().map(|t| parse_formula(t).unwrap()).collect())
}

/// Normalized priors of `leading` under `probs`.
fn priors(dpi: &Dpi, leading: &[AxiomSet], probs: &AxiomProbs) -> DiagnosisBelief {
    let ids = dpi.kb_ids();
    DiagnosisBelief::new(leading.iter().map(|d| diagnosis_prior(d, &ids, probs)).collect()).normalize().unwrap()
}

fn g1(c: &mut Check) {
    let dpi = fixture("example1.json");
    let r = Reasoner::new(&dpi).unwrap();
    c.eq(quick_xplain(&dpi).unwrap().map(|cs| cs.axiom_ids), Some(set(&[1, 2, 3, 4])), "minimal conflict");
    c.eq(brute_force_minimal_conflicts(&r).unwrap(), sets(&[&[1, 2, 3, 4]]), "all minimal conflicts");
    let singletons = sets(&[&[1], &[2], &[3], &[4]]);
    c.eq(sorted(brute_force_minimal_diagnoses(&r).unwrap()), singletons.clone(), "minimal diagnoses");
    c.eq(hs_tree_diagnoses(&r, &AxiomProbs::new(), 10).unwrap(), singletons.clone(), "hs-tree diagnoses");

    let ctx = QueryContext::new(&dpi, &singletons).unwrap();
    // the printed table lists the assertions about w; A(v) yields the same
    // chain for v, checked separately
    let table = [vec![], vec!["B(w)"], vec!["B(w)", "C(w)"], vec!["B(w)", "C(w)", "D(w)"]];
    for (i, want) in table.iter().enumerate() {
        let all: Vec<String> = ctx.entailments_of(i).iter().map(ToString::to_string).collect();
        let about_w: Vec<&str> = all.iter().map(String::as_str).filter(|s| s.ends_with("(w)")).collect();
        c.eq(about_w, want.clone(), &format!("entailments of O{}", i + 1));
        let about_v: Vec<String> = all.iter().filter(|s| s.ends_with("(v)")).cloned().collect();
        c.eq(about_v, want.iter().map(|s| s.replace("(w)", "(v)")).collect(), &format!("v entailments of O{}", i + 1));
    }

    let pool = ctx.pool().unwrap();
    let got: Vec<(Vec<String>, QPartition)> = pool.entries.iter().map(|e| (e.query.texts(), e.partition.clone())).collect();
    let want = vec![
        (vec!["B(w)".to_string()], part(&[1, 2, 3], &[0], &[])),
        (vec!["C(w)".to_string()], part(&[2, 3], &[0, 1], &[])),
        (vec!["D(w)".to_string()], part(&[3], &[0, 1, 2], &[])),
    ];
    c.eq(got, want, "minimized query pool");
}

fn g2(c: &mut Check) {
    let dpi = fixture("example1.json");
    let leading = sets(&[&[1], &[2], &[3], &[4]]);
    let ctx = QueryContext::new(&dpi, &leading).unwrap();
    let qs = [query(&["B(w)"]), query(&["C(w)"]), query(&["D(w)"])];
    let parts: Vec<QPartition> = qs.iter().map(|q| ctx.classify(q).unwrap()).collect();
    let scores = |b: &DiagnosisBelief, ps: &[QPartition]| -> Vec<f64> { ps.iter().map(|p| score_entropy(p, b)).collect() };

    c.close(&scores(&DiagnosisBelief::uniform(4), &parts), &[0.1887, 0.0, 0.1887], "uniform scores");

    let model = |p1: f64| -> AxiomProbs { [(1, p1), (2, 0.01), (3, 0.01), (4, 0.01)].into_iter().collect() };
    let b = priors(&dpi, &leading, &model(0.025));
    c.conflict(&scores(&b, &parts), &[0.250, 0.408, 0.629], "scores with p(ax1)=0.025");
    c.close(&scores(&priors(&dpi, &leading, &model(0.1)), &parts), &[0.250, 0.408, 0.629], "scores with p(ax1)=0.1");

    // after C(w) = no under uniform priors
    let mut s = start_session(dpi, SessionConfig::default()).unwrap();
    c.eq(next_texts(&s), vec!["C(w)".to_string()], "first query");
    submit_answer(&mut s, Reply::No).unwrap();
    let after = QueryContext::new(&s.dpi, &s.leading).unwrap();
    let parts: Vec<QPartition> = qs.iter().map(|q| after.classify(q).unwrap()).collect();
    c.close(&scores(&s.belief, &parts), &[0.0, 1.0, 1.0], "scores after C(w)=no");
}

fn next_texts(s: &SessionState) -> Vec<String> {
    s.pending.as_ref().map(|e| e.query.texts()).unwrap_or_default()
}

fn g3(c: &mut Check) {
    let dpi = fixture("example2.json");
    let model = faults("example2.faults.json");
    let r = Reasoner::new(&dpi).unwrap();
    c.eq(brute_force_minimal_conflicts(&r).unwrap(), sets(&[&[1, 3, 4], &[1, 2, 3, 5]]), "minimal conflicts");
    // D1..D4 in the printed order
    let ds = sets(&[&[1], &[3], &[4, 5], &[2, 4]]);
    c.eq(sorted(brute_force_minimal_diagnoses(&r).unwrap()), sorted(ds.clone()), "minimal diagnoses");

    let rates = FaultModel { axioms: Default::default(), ..model.clone() };
    c.close(&[axiom_fault_prob(&dpi.kb[1], &rates)], &[0.108], "p(ax2) from element rates");

    let probs = axiom_probs(&dpi.kb, &model);
    let prior = priors(&dpi, &ds, &probs);
    c.close(&prior.probs, &[0.0970, 0.5874, 0.0026, 0.3130], "priors");

    let ctx = QueryContext::new(&dpi, &ds).unwrap();
    let q1 = ctx.classify(&query(&["B sub M3"])).unwrap();
    let q3 = ctx.classify(&query(&["M1 sub B"])).unwrap();
    let q4 = ctx.classify(&query(&["M1(w)", "M2(u)"])).unwrap();
    c.eq(q3.clone(), part(&[0, 2, 3], &[1], &[]), "partition of q3");
    c.eq(q4.clone(), part(&[1, 2, 3], &[0], &[]), "partition of q4");
    let row: Vec<f64> = [&q3, &q4, &q1].iter().map(|p| score_entropy(p, &prior)).collect();
    c.close(&row, &[0.022, 0.540, 0.974], "initial scores of q3, q4, q1");

    let after3 = bayes_update(&prior, &q3, Answer::Yes).unwrap();
    c.close(&after3.probs, &[0.2352, 0.0, 0.0063, 0.7585], "posteriors after q3=yes");
    let after4 = bayes_update(&after3, &q4, Answer::Yes).unwrap();
    c.close(&after4.probs, &[0.0, 0.0, 0.0082, 0.9918], "posteriors after q4=yes");

    let target = set(&[2, 4]);
    let dynamic = SessionConfig { fault_model: model.clone(), ..SessionConfig::default() };
    let out = run_batch(&dpi, &dynamic, &target).unwrap();
    c.ok(out.query_count <= 3 && out.proposal.map(|p| p.diagnosis.axiom_ids) == Some(target.clone()), format!("ENT session: {} queries", out.query_count));
    let fixed = SessionConfig { fault_model: model, sigma: 0.95, mode: Mode::Static, ..SessionConfig::default() };
    let out = run_batch(&dpi, &fixed, &target).unwrap();
    c.ok(out.query_count == 2 && out.proposal.map(|p| p.diagnosis.axiom_ids) == Some(target), format!("ENT session at 0.95: {} queries", out.query_count));
}

fn g4(c: &mut Check) {
    let dpi = fixture("partdx.json");
    let r = Reasoner::new(&dpi).unwrap();
    c.eq(inv_qx(&dpi, &AxiomProbs::new()).unwrap().map(|d| d.axiom_ids), Some(set(&[2, 3])), "inv-qx");
    c.eq(
        sorted(inv_hs_tree(&r, &AxiomProbs::new(), usize::MAX, &[])),
        sorted(sets(&[&[2, 3], &[3, 4], &[1, 4, 5]])),
        "inv-hs-tree diagnoses",
    );
    c.eq(brute_force_minimal_conflicts(&r).unwrap(), sets(&[&[1, 3], &[2, 4], &[3, 4], &[3, 5]]), "minimal conflicts");

    let config = SessionConfig { engine: Engine::Direct, n_leading: 2, ..SessionConfig::default() };
    let mut s = start_session(dpi.clone(), config).unwrap();
    pose_query(&mut s, query(&["c(w)"])).unwrap();
    submit_answer(&mut s, Reply::No).unwrap();
    if s.status == SessionStatus::AwaitingAnswer {
        pose_query(&mut s, query(&["a sub c"])).unwrap();
        submit_answer(&mut s, Reply::Yes).unwrap();
    }
    c.eq(s.status, SessionStatus::Converged, "direct session status");
    c.eq(s.diagnosis().map(|d| d.axiom_ids), Some(set(&[3, 4])), "direct session diagnosis");
}

fn g5(c: &mut Check) {
    let dpi = fixture("rio.json");
    let model = faults("rio.faults.json");
    let ds: Vec<AxiomSet> = (1..=6).map(|i| set(&[i])).collect();
    let b = priors(&dpi, &ds, &axiom_probs(&dpi.kb, &model));
    c.conflict(&b.probs, &[0.003, 0.003, 0.003, 0.003, 0.393, 0.591], "singleton priors");

    let ctx = QueryContext::new(&dpi, &ds).unwrap();
    let got: BTreeSet<QPartition> = ctx.pool().unwrap().entries.into_iter().map(|e| e.partition).collect();
    // the printed X8 row has D2 where D4 belongs
    let want: BTreeSet<QPartition> = [
        part(&[3, 5], &[0, 1, 2, 4], &[]),
        part(&[0, 1, 2, 3, 5], &[4], &[]),
        part(&[1, 2, 3, 5], &[0, 4], &[]),
        part(&[0, 1, 3, 4, 5], &[2], &[]),
        part(&[1, 3, 5], &[0, 2, 4], &[]),
        part(&[2, 3], &[0, 1, 4, 5], &[]),
        part(&[0, 1, 3, 5], &[2, 4], &[]),
        part(&[3], &[0, 1, 2, 4, 5], &[]),
        part(&[2, 3, 5], &[0, 1, 4], &[]),
    ]
    .into_iter()
    .collect();
    c.eq(got, want, "query partitions");

    let qc = |texts: &[&str]| query_cautiousness(&ctx.classify(&query(texts)).unwrap(), 6);
    c.close(
        &[qc(&["DeptEmployee(s)", "Student(s)"]), qc(&["PhD(s)"]), qc(&["Researcher(s)", "Student(s)"])],
        &[2.0 / 6.0, 1.0 / 6.0, 3.0 / 6.0],
        "cautiousness",
    );
    let x3 = ctx.classify(&query(&["Researcher(s)", "Student(s)"])).unwrap();
    let u = rio_update(&RioState { c: 0.4, c_min: 0.0, c_max: 0.5, epsilon: 0.25 }, &x3, Answer::Yes, 6);
    c.ok((u.c - 0.233).abs() <= 5e-3, format!("cautiousness update: got {:.4}", u.c));

    for (strategy, target, want) in [(StrategyChoice::Entropy, 2, 4), (StrategyChoice::Split, 2, 3), (StrategyChoice::Entropy, 6, 2)] {
        let config = SessionConfig { fault_model: model.clone(), sigma: 1.0, strategy, ..SessionConfig::default() };
        let out = run_batch(&dpi, &config, &set(&[target])).unwrap();
        c.ok(
            out.query_count == want && out.proposal.map(|p| p.diagnosis.axiom_ids) == Some(set(&[target])),
            format!("({strategy}, D{target}): {} queries, want {want}", out.query_count),
        );
    }
}

fn instances(n: usize, max_kb: usize, seed: u64) -> Vec<Dpi> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomSpec { max_kb, ..RandomSpec::default() };
    (0..n).map(|_| random_dpi(&mut rng, &spec)).collect()
}

fn p1(c: &mut Check) {
    let dpis = instances(60, 10, 1);
    let mut nontrivial = 0;
    for (k, dpi) in dpis.iter().enumerate() {
        let r = Reasoner::new(dpi).unwrap();
        let diagnoses = sorted(brute_force_minimal_diagnoses(&r).unwrap());
        let hitting = sorted(minimal_hitting_sets(&brute_force_minimal_conflicts(&r).unwrap(), r.kb_ids()).unwrap());
        let hs = sorted(hs_tree_diagnoses(&r, &AxiomProbs::new(), usize::MAX).unwrap());
        let inv = sorted(inv_hs_tree(&r, &AxiomProbs::new(), usize::MAX, &[]));
        c.ok(hitting == diagnoses && hs == diagnoses && inv == diagnoses, format!("instance {k} disagrees"));
        nontrivial += usize::from(diagnoses.len() > 1);
    }
    c.ok(nontrivial >= 10, format!("only {nontrivial} instances with several diagnoses"));
}

fn fixtures() -> Vec<(&'static str, Dpi, FaultModel)> {
    vec![
        ("intro", fixture("intro.json"), FaultModel::default()),
        ("example1", fixture("example1.json"), FaultModel::default()),
        ("example2", fixture("example2.json"), faults("example2.faults.json")),
        ("partdx", fixture("partdx.json"), FaultModel::default()),
        ("rio", fixture("rio.json"), faults("rio.faults.json")),
    ]
}

fn p2(c: &mut Check) {
    let strategies = [StrategyChoice::Entropy, StrategyChoice::Split, StrategyChoice::Rio(RioState::default()), StrategyChoice::Random { seed: 7 }];
    for (name, dpi, model) in fixtures() {
        let r = Reasoner::new(&dpi).unwrap();
        let all = sorted(brute_force_minimal_diagnoses(&r).unwrap());
        let ctx = QueryContext::new(&dpi, &all).unwrap();
        let entailments = |d: &AxiomSet| all.iter().position(|x| x == d).map(|i| ctx.entailments_of(i));
        for target in &all {
            for strategy in strategies {
                for mode in [Mode::Dynamic, Mode::Static] {
                    let config = SessionConfig { fault_model: model.clone(), sigma: 1.0, strategy, mode, ..SessionConfig::default() };
                    let out = run_batch(&dpi, &config, target).unwrap();
                    let found = out.proposal.as_ref().map(|p| p.diagnosis.axiom_ids.clone());
                    let valid = out.proposal.as_ref().is_some_and(|p| p.verify(&dpi).unwrap());
                    let what = format!("{name} {strategy} {mode} target {target:?}: got {found:?}");
                    match &found {
                        Some(f) if f == target && valid => {}
                        // no query in the language separates the two, so the
                        // oracle's answers are the same for either
                        Some(f) if valid && out.status == SessionStatus::Exhausted && entailments(f) == entailments(target) => {
                            c.known(format!("{what}, indistinguishable from the target"))
                        }
                        _ => c.ok(false, what),
                    }
                }
            }
        }
    }
}

fn p3(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 0..=8u32 {
        let kb: Vec<u32> = (1..=n).collect();
        let probs: AxiomProbs = kb.iter().map(|&id| (id, rng.gen_range(0.0..0.99))).collect();
        let total: f64 = (0u32..1 << n).map(|mask| diagnosis_prior(&kb.iter().copied().filter(|id| mask >> (id - 1) & 1 == 1).collect(), &kb, &probs)).sum();
        c.ok((total - 1.0).abs() < 1e-9, format!("prior mass over subsets of {n} axioms: {total}"));
    }
    for (k, dpi) in instances(30, 8, 4).into_iter().enumerate() {
        let mut state = start_session(dpi, SessionConfig { n_leading: 6, ..SessionConfig::default() }).unwrap();
        loop {
            let sum: f64 = state.belief.probs.iter().sum();
            c.ok((sum - 1.0).abs() < 1e-9, format!("instance {k}: belief sums to {sum}"));
            let Some(e) = &state.pending else { break };
            let (yes, no) = answer_likelihood(&e.partition, &state.belief);
            c.ok((yes + no - 1.0).abs() < 1e-12, format!("instance {k}: likelihoods sum to {}", yes + no));
            let reply = if rng.gen_bool(0.5) { Reply::Yes } else { Reply::No };
            submit_answer(&mut state, reply).unwrap();
        }
    }
}

fn p4(c: &mut Check) {
    for (name, dpi, model) in fixtures() {
        let state = start_session(dpi.clone(), SessionConfig { fault_model: model, ..SessionConfig::default() }).unwrap();
        if state.leading.len() < 2 {
            continue;
        }
        let ctx = QueryContext::new(&dpi, &state.leading).unwrap();
        let pool = ctx.pool().unwrap();
        for e in &pool.entries {
            let p = &e.partition;
            let seed: Vec<usize> = p.d_plus.iter().copied().collect();
            let full = Query::new(ctx.common_entailments(&seed));
            if ctx.classify(&full).unwrap() == *p {
                let m = minimize_query(&dpi, &state.leading, &full, p).unwrap();
                c.ok(ctx.classify(&m).unwrap() == *p, format!("{name}: minimizing {:?} changed its partition", full.texts()));
            }
            c.ok(minimize_query(&dpi, &state.leading, &e.query, p).unwrap().formulas == e.query.formulas, format!("{name}: {:?} shrinks", e.query.texts()));
            for drop in 0..e.query.formulas.len() {
                let mut rest = e.query.clone();
                rest.formulas.remove(drop);
                let broken = rest.formulas.is_empty() || ctx.classify(&rest).unwrap() != *p;
                c.ok(broken, format!("{name}: {:?} is not minimal", e.query.texts()));
            }
        }
        let best = pool.entries.iter().map(|e| score_entropy(&e.partition, &state.belief)).fold(f64::INFINITY, f64::min);
        let ckk = ctx.ckk(&state.belief, 0.0).unwrap().map(|e| score_entropy(&e.partition, &state.belief));
        c.ok(ckk.is_some_and(|s| (s - best).abs() < 1e-9), format!("{name}: CKK score {ckk:?}, pool minimum {best}"));
    }
}

fn main() {
    let criteria: [(&str, &str, fn(&mut Check)); 9] = [
        ("G1", "Example 1 conflicts, diagnoses, entailments, query pool", g1),
        ("G2", "entropy scores", g2),
        ("G3", "Example 2 probabilities, scores, sessions", g3),
        ("G4", "Part DX direct engine", g4),
        ("G5", "RIO priors, partitions, cautiousness, sessions", g5),
        ("P1", "duality of conflicts and diagnoses", p1),
        ("P2", "session soundness", p2),
        ("P3", "probability laws", p3),
        ("P4", "query minimization and CKK", p4),
    ];
    let start = Instant::now();
    let mut unexpected = 0;
    for (id, title, run) in criteria {
        let mut c = Check::default();
        let t = Instant::now();
        if let Err(e) = catch_unwind(AssertUnwindSafe(|| run(&mut c))) {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            c.failed.push(format!("panicked: {}", msg.unwrap_or_default()));
        }
        let ms = t.elapsed().as_millis();
        if c.failed.is_empty() && c.conflicts.is_empty() {
            println!("PASS {id} {title} ({ms} ms)");
            continue;
        }
        unexpected += c.failed.len();
        let details: Vec<String> = c.failed.iter().take(40).cloned().chain(c.conflicts.iter().map(|s| format!("{s} [conflict]"))).collect();
        println!("FAIL {id} {title} ({ms} ms): {}", details.join("; "));
    }
    println!("total {:.1} s", start.elapsed().as_secs_f64());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
