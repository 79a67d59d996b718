//! The sequential debugging loop: leading diagnoses, query selection,
//! answers folded into the instance as test cases, belief and RIO updates.

pub mod batch;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnosis::{by_size_then_ids, hs_tree_diagnoses, inv_hs_tree, AxiomProbs, Diagnosis, DiagnosisError, HsTree};
use crate::logic::{check_validity, AxiomSet, Dpi, DpiError, GroundError, Polarity, Reasoner, TestOrigin};
use crate::probability::{answer_factor, axiom_probs, diagnosis_prior, DiagnosisBelief, FaultModel, ProbabilityError};
use crate::query::pool::PoolEntry;
use crate::query::{Answer, QPartition, Query, QueryContext, QueryError, POOL_LIMIT};
use crate::strategy::{rio_update, select_query, RioState, StrategyChoice};

pub use batch::{non_interactive_debug, run_batch, BatchOutcome, NonInteractiveResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// QX conflicts and a best-first HS-Tree.
    #[default]
    #[serde(alias = "hstree", alias = "hs-tree")]
    Conflict,
    /// Inv-QX labels in an inverse tree.
    Direct,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Candidates are the minimal diagnoses of the initial instance.
    Static,
    /// Leading diagnoses are recomputed against the current instance.
    #[default]
    Dynamic,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Engine, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "conflict" | "hstree" | "hs-tree" => Ok(Engine::Conflict),
            "direct" | "inv" => Ok(Engine::Direct),
            other => Err(format!("unknown engine '{other}'")),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Conflict => "conflict",
            Engine::Direct => "direct",
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
        })
    }
}

fn default_n_leading() -> usize {
    9
}

fn default_sigma() -> f64 {
    0.85
}

fn default_budget() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    #[serde(default = "default_n_leading")]
    pub n_leading: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub strategy: StrategyChoice,
    #[serde(default)]
    pub fault_model: FaultModel,
    /// When set, entropy selection takes the CKK shortcut with this threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "default_budget")]
    pub witness_budget: usize,
}

impl Default for SessionConfig {
    fn default() -> SessionConfig {
        SessionConfig {
            n_leading: default_n_leading(),
            sigma: default_sigma(),
            engine: Engine::default(),
            mode: Mode::default(),
            strategy: StrategyChoice::default(),
            fault_model: FaultModel::default(),
            gamma: None,
            witness_budget: default_budget(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.n_leading == 0 || self.n_leading > POOL_LIMIT {
            return Err(SessionError::Config(format!("n_leading must be in 1..={POOL_LIMIT}, got {}", self.n_leading)));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(SessionError::Config(format!("sigma must be in [0, 1], got {}", self.sigma)));
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0) {
                return Err(SessionError::Config(format!("gamma must be non-negative, got {g}")));
            }
        }
        if let StrategyChoice::Rio(s) = &self.strategy {
            if !(s.c_min <= s.c && s.c <= s.c_max) || !(s.epsilon > 0.0 && s.epsilon < 0.5) {
                return Err(SessionError::Config("rio needs c_min <= c <= c_max and epsilon in (0, 1/2)".into()));
            }
        }
        self.fault_model.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionStatus {
    AwaitingAnswer,
    Converged,
    /// Several diagnoses remain but no query separates them.
    Exhausted,
    Aborted,
}

impl SessionStatus {
    pub fn is_finished(self) -> bool {
        self != SessionStatus::AwaitingAnswer
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reply {
    Yes,
    No,
    Skip,
}

impl Reply {
    pub fn answer(self) -> Option<Answer> {
        match self {
            Reply::Yes => Some(Answer::Yes),
            Reply::No => Some(Answer::No),
            Reply::Skip => None,
        }
    }
}

impl From<Answer> for Reply {
    fn from(a: Answer) -> Reply {
        match a {
            Answer::Yes => Reply::Yes,
            Answer::No => Reply::No,
        }
    }
}

impl FromStr for Reply {
    type Err = String;

    fn from_str(s: &str) -> Result<Reply, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" => Ok(Reply::Yes),
            "n" | "no" => Ok(Reply::No),
            "s" | "skip" => Ok(Reply::Skip),
            other => Err(format!("expected y, n or s, got '{other}'")),
        }
    }
}

/// One asked query. Partition indices refer to `leading`, the leading
/// diagnoses at the time it was asked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub query: Query,
    pub partition: QPartition,
    pub leading: Vec<AxiomSet>,
    pub reply: Reply,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairProposal {
    pub diagnosis: Diagnosis,
    /// (O \ D) ∪ ⋃P as statements.
    pub solution_kb: Vec<String>,
}

impl RepairProposal {
    fn new(dpi: &Dpi, diagnosis: Diagnosis) -> RepairProposal {
        let mut solution_kb: Vec<String> =
            dpi.kb.iter().filter(|a| !diagnosis.axiom_ids.contains(&a.id)).map(|a| a.text.clone()).collect();
        for t in &dpi.positive_tests {
            solution_kb.extend(t.texts());
        }
        RepairProposal { diagnosis, solution_kb }
    }

    /// Re-check the solution KB as a fixed part next to the background:
    /// every requirement holds and no negative test case is entailed.
    pub fn verify(&self, dpi: &Dpi) -> Result<bool, SessionError> {
        let mut env = dpi.to_envelope();
        env.background = dpi.background.iter().map(|a| a.text.clone()).chain(self.solution_kb.iter().cloned()).collect();
        env.kb = Vec::new();
        env.positive_tests = Vec::new();
        let fixed = Dpi::from_envelope(&env)?;
        Ok(check_validity(&fixed, &AxiomSet::new())?.is_valid())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dpi(#[from] DpiError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
    #[error("no query is pending")]
    NoPendingQuery,
    #[error("the target {0:?} is not a minimal diagnosis of the instance")]
    NotADiagnosis(AxiomSet),
}

/// Outcome of the stop test.
#[derive(Clone, Debug, PartialEq)]
pub enum Stop {
    Continue,
    Converged(AxiomSet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub config: SessionConfig,
    /// The instance the session started from.
    pub initial: Dpi,
    /// The initial instance plus every answered query as a test case.
    pub dpi: Dpi,
    pub leading: Vec<AxiomSet>,
    /// Unnormalized priors aligned with `leading`.
    pub priors: Vec<f64>,
    pub belief: DiagnosisBelief,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rio: Option<RioState>,
    pub history: Vec<HistoryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<PoolEntry>,
    /// Partitions skipped for the current leading set.
    #[serde(default)]
    pub skipped: Vec<QPartition>,
    pub status: SessionStatus,
}

/// Compute the leading diagnoses and the first query.
pub fn start_session(dpi: Dpi, config: SessionConfig) -> Result<SessionState, SessionError> {
    config.validate()?;
    dpi.check()?;
    let rio = match config.strategy {
        StrategyChoice::Rio(s) => Some(s),
        _ => None,
    };
    let mut state = SessionState {
        config,
        initial: dpi.clone(),
        dpi,
        leading: Vec::new(),
        priors: Vec::new(),
        belief: DiagnosisBelief { probs: Vec::new(), normalized: true },
        rio,
        history: Vec::new(),
        pending: None,
        skipped: Vec::new(),
        status: SessionStatus::AwaitingAnswer,
    };
    state.replenish()?;
    state.refresh()?;
    Ok(state)
}

/// The pending query, `None` once nothing is left to ask.
pub fn next_query(state: &SessionState) -> Option<&PoolEntry> {
    state.pending.as_ref()
}

/// Fold an answer into the session. On error the state is left unchanged.
pub fn submit_answer(state: &mut SessionState, reply: Reply) -> Result<(), SessionError> {
    let mut next = state.clone();
    next.apply(reply)?;
    *state = next;
    Ok(())
}

/// Replace the pending query with one of the user's own. It is classified
/// against the current leading diagnoses and answered like any other.
pub fn pose_query(state: &mut SessionState, query: Query) -> Result<&QPartition, SessionError> {
    if state.status != SessionStatus::AwaitingAnswer {
        return Err(SessionError::NoPendingQuery);
    }
    let ctx = QueryContext::with_budget(&state.dpi, &state.leading, state.budget())?;
    let partition = ctx.classify(&query)?;
    state.pending = Some(PoolEntry { query, partition });
    Ok(&state.pending.as_ref().expect("just set").partition)
}

/// Give up on a session that is still waiting for an answer.
pub fn abort(state: &mut SessionState) -> Result<(), SessionError> {
    if state.status != SessionStatus::AwaitingAnswer {
        return Err(SessionError::NoPendingQuery);
    }
    state.pending = None;
    state.status = SessionStatus::Aborted;
    Ok(())
}

/// Converged when the best diagnosis leads the runner-up by more than
/// `sigma`, or when it is the only one left.
pub fn stop_check(state: &SessionState, sigma: f64) -> Stop {
    let Some(best) = state.best_index() else { return Stop::Continue };
    if state.leading.len() == 1 {
        return Stop::Converged(state.leading[0].clone());
    }
    let p1 = state.belief.probs[best];
    let p2 = state
        .belief
        .probs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &p)| p)
        .fold(0.0, f64::max);
    if p1 - p2 > sigma {
        Stop::Converged(state.leading[best].clone())
    } else {
        Stop::Continue
    }
}

impl SessionState {
    fn probs(&self) -> AxiomProbs {
        axiom_probs(&self.initial.kb, &self.config.fault_model)
    }

    fn budget(&self) -> usize {
        self.config.witness_budget
    }

    /// Most probable leading diagnosis; ties go to the earlier one.
    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &p) in self.belief.probs.iter().enumerate() {
            if best.map_or(true, |b| p > self.belief.probs[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Leading diagnoses with priors normalized over the leading set.
    pub fn diagnoses(&self) -> Vec<Diagnosis> {
        let total: f64 = self.priors.iter().sum();
        self.leading
            .iter()
            .enumerate()
            .map(|(i, d)| Diagnosis {
                axiom_ids: d.clone(),
                prior: if total > 0.0 { self.priors[i] / total } else { 0.0 },
                posterior: self.belief.probs[i],
            })
            .collect()
    }

    /// The diagnosis the session settled on.
    pub fn diagnosis(&self) -> Option<Diagnosis> {
        if !matches!(self.status, SessionStatus::Converged | SessionStatus::Exhausted) {
            return None;
        }
        self.best_index().map(|i| self.diagnoses().swap_remove(i))
    }

    pub fn proposal(&self) -> Option<RepairProposal> {
        self.diagnosis().map(|d| RepairProposal::new(&self.dpi, d))
    }

    /// Number of yes/no answers so far.
    pub fn answered(&self) -> usize {
        self.history.iter().filter(|h| h.reply != Reply::Skip).count()
    }

    fn apply(&mut self, reply: Reply) -> Result<(), SessionError> {
        if self.status != SessionStatus::AwaitingAnswer {
            return Err(SessionError::NoPendingQuery);
        }
        let entry = self.pending.take().ok_or(SessionError::NoPendingQuery)?;
        self.history.push(HistoryEntry {
            query: entry.query.clone(),
            partition: entry.partition.clone(),
            leading: self.leading.clone(),
            reply,
        });
        let Some(answer) = reply.answer() else {
            self.skipped.push(entry.partition);
            return self.refresh();
        };
        let mass: f64 =
            self.belief.probs.iter().enumerate().map(|(i, p)| p * answer_factor(&entry.partition, i, answer)).sum();
        if !(mass > 0.0) {
            return Err(ProbabilityError::Contradiction.into());
        }
        if let Some(rio) = &self.rio {
            self.rio = Some(rio_update(rio, &entry.partition, answer, self.leading.len()));
        }
        let polarity = match answer {
            Answer::Yes => Polarity::Positive,
            Answer::No => Polarity::Negative,
        };
        self.dpi.add_test(entry.query.formulas, polarity, TestOrigin::AnsweredQuery);
        self.skipped.clear();
        self.replenish()?;
        self.refresh()
    }

    /// Recompute the leading diagnoses and their beliefs for the current
    /// instance.
    fn replenish(&mut self) -> Result<(), SessionError> {
        let probs = self.probs();
        let n = self.config.n_leading;
        let current = Reasoner::with_extra(&self.dpi, &[], self.budget())?;
        if !current.admissible() {
            return Err(DiagnosisError::Inadmissible.into());
        }
        let mut leading = match self.config.mode {
            Mode::Dynamic => match self.config.engine {
                Engine::Conflict => hs_tree_diagnoses(&current, &probs, n)?,
                Engine::Direct => {
                    let seeds: Vec<AxiomSet> =
                        self.leading.iter().filter(|d| current.valid_without(d)).cloned().collect();
                    inv_hs_tree(&current, &probs, n, &seeds)
                }
            },
            Mode::Static => {
                let original = Reasoner::with_extra(&self.initial, &[], self.budget())?;
                match self.config.engine {
                    Engine::Conflict => {
                        HsTree::new(&original, &probs)?.filter(|d| current.valid_without(d)).take(n).collect()
                    }
                    Engine::Direct => {
                        if !original.admissible() {
                            return Err(DiagnosisError::Inadmissible.into());
                        }
                        let mut m = n;
                        loop {
                            let all = inv_hs_tree(&original, &probs, m, &[]);
                            let valid: Vec<AxiomSet> =
                                all.iter().filter(|d| current.valid_without(d)).take(n).cloned().collect();
                            if valid.len() >= n || all.len() < m {
                                break valid;
                            }
                            m = m.saturating_mul(2);
                        }
                    }
                }
            }
        };
        let kb_ids = self.initial.kb_ids();
        let prior = |d: &AxiomSet| diagnosis_prior(d, &kb_ids, &probs);
        leading.sort_by(|a, b| by_prior(prior(a), prior(b)).then_with(|| by_size_then_ids(a, b)));
        let priors: Vec<f64> = leading.iter().map(prior).collect();
        let weights = self.posterior_weights(&leading, &priors)?;
        self.belief = DiagnosisBelief::new(weights).normalize().map_err(|_| ProbabilityError::Contradiction)?;
        self.leading = leading;
        self.priors = priors;
        Ok(())
    }

    /// Prior times the likelihood of every answer so far. A diagnosis that
    /// was leading when a query was asked keeps the recorded partition;
    /// others are classified against the instance of that moment.
    fn posterior_weights(&self, leading: &[AxiomSet], priors: &[f64]) -> Result<Vec<f64>, SessionError> {
        let mut weights = priors.to_vec();
        let mut dpi = self.initial.clone();
        for h in &self.history {
            let Some(answer) = h.reply.answer() else { continue };
            let mut fresh: Option<Reasoner> = None;
            for (w, d) in weights.iter_mut().zip(leading) {
                let class = match h.leading.iter().position(|x| x == d) {
                    Some(i) => answer_factor(&h.partition, i, answer),
                    None => {
                        if fresh.is_none() {
                            fresh = Some(Reasoner::with_extra(&dpi, &h.query.formulas, self.budget())?);
                        }
                        let r = fresh.as_ref().expect("just built");
                        let single = classify_one(r, d, &h.query);
                        answer_factor(&single, 0, answer)
                    }
                };
                *w *= class;
            }
            let polarity = match answer {
                Answer::Yes => Polarity::Positive,
                Answer::No => Polarity::Negative,
            };
            dpi.add_test(h.query.formulas.clone(), polarity, TestOrigin::AnsweredQuery);
        }
        Ok(weights)
    }

    /// Decide convergence or pick the next query.
    fn refresh(&mut self) -> Result<(), SessionError> {
        self.pending = None;
        if let Stop::Converged(_) = stop_check(self, self.config.sigma) {
            self.status = SessionStatus::Converged;
            return Ok(());
        }
        let ctx = QueryContext::with_budget(&self.dpi, &self.leading, self.budget())?;
        let use_ckk = matches!(self.config.strategy, StrategyChoice::Entropy) && self.skipped.is_empty();
        let picked = match (self.config.gamma, use_ckk) {
            (Some(gamma), true) => ctx.ckk(&self.belief, gamma)?,
            _ => {
                let mut pool = ctx.pool()?;
                pool.entries.retain(|e| !self.skipped.contains(&e.partition));
                if pool.is_empty() {
                    None
                } else {
                    let choice = match (&self.config.strategy, &self.rio) {
                        (StrategyChoice::Rio(_), Some(state)) => StrategyChoice::Rio(*state),
                        (c, _) => *c,
                    };
                    let step = self.history.len() as u64;
                    let i = select_query(&pool, &self.belief, &choice, step).expect("pool is not empty");
                    Some(pool.entries.swap_remove(i))
                }
            }
        };
        match picked {
            Some(entry) => {
                self.pending = Some(entry);
                self.status = SessionStatus::AwaitingAnswer;
            }
            None => self.status = SessionStatus::Exhausted,
        }
        Ok(())
    }
}

fn classify_one(r: &Reasoner, d: &AxiomSet, query: &Query) -> QPartition {
    let mut q = QPartition::default();
    if r.entails_without(d, &query.formulas) {
        q.d_plus.insert(0);
    } else if r.violates_without(d, &query.formulas) {
        q.d_minus.insert(0);
    } else {
        q.d_zero.insert(0);
    }
    q
}

fn by_prior(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
        Ordering::Equal
    } else {
        b.total_cmp(&a)
    }
}
