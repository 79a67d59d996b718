//! Request and response bodies of the HTTP interface, shared by the
//! service, the client and the CLI.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diagnosis::Diagnosis;
use crate::logic::{AxiomSet, Dpi, DpiEnvelope};
use crate::probability::FaultModel;
use crate::session::{
    non_interactive_debug, run_batch, start_session, NonInteractiveResult, RepairProposal, Reply, SessionConfig, SessionError,
    SessionState, SessionStatus,
};
use crate::strategy::StrategyChoice;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub dpi: DpiEnvelope,
    #[serde(default)]
    pub config: SessionConfig,
}

impl CreateSessionRequest {
    pub fn start(&self) -> Result<SessionState, SessionError> {
        self.config.validate()?;
        start_session(Dpi::from_envelope(&self.dpi)?, self.config.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub answer: Reply,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AskedQuery {
    pub query: Vec<String>,
    pub reply: Reply,
}

/// What a client needs to render a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub status: SessionStatus,
    /// The pending query, absent once the session is finished.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<Vec<String>>,
    pub leading: Vec<Diagnosis>,
    pub belief: Vec<f64>,
    pub history: Vec<AskedQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<Diagnosis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<RepairProposal>,
}

impl SessionView {
    pub fn new(session_id: &str, state: &SessionState) -> SessionView {
        SessionView {
            session_id: session_id.to_string(),
            status: state.status,
            query: state.pending.as_ref().map(|e| e.query.texts()),
            leading: state.diagnoses(),
            belief: state.belief.probs.clone(),
            history: state.history.iter().map(|h| AskedQuery { query: h.query.texts(), reply: h.reply }).collect(),
            diagnosis: state.diagnosis(),
            proposal: state.proposal(),
        }
    }
}

/// The stored form of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub snapshot: SessionState,
    /// RFC 3339.
    pub created: String,
    pub updated: String,
}

/// Body of `GET /sessions/{id}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionDetail {
    pub record: SessionRecord,
    pub view: SessionView,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosesView {
    pub session_id: String,
    pub status: SessionStatus,
    pub diagnoses: Vec<Diagnosis>,
}

/// One or several target diagnoses; a bare id list is a single target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Targets {
    One(AxiomSet),
    Many(Vec<AxiomSet>),
}

impl Targets {
    pub fn into_vec(self) -> Vec<AxiomSet> {
        match self {
            Targets::One(t) => vec![t],
            Targets::Many(ts) => ts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRequest {
    pub dpi: DpiEnvelope,
    pub targets: Vec<AxiomSet>,
    pub strategies: Vec<StrategyChoice>,
    /// Shared settings; its strategy is replaced per row.
    #[serde(default)]
    pub config: SessionConfig,
    /// Seed for the random strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub strategy: String,
    pub target: AxiomSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<AxiomSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<SessionStatus>,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub strategy: String,
    pub runs: usize,
    pub min: usize,
    pub avg: f64,
    pub max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
    pub aggregates: Vec<Aggregate>,
}

impl BatchReport {
    /// Min/avg/max query counts per strategy over the rows without error.
    pub fn from_rows(rows: Vec<BatchRow>) -> BatchReport {
        let mut order: Vec<String> = Vec::new();
        let mut counts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for row in &rows {
            if !order.contains(&row.strategy) {
                order.push(row.strategy.clone());
            }
            if let Some(n) = row.query_count {
                counts.entry(row.strategy.clone()).or_default().push(n);
            }
        }
        let aggregates = order
            .into_iter()
            .filter_map(|s| {
                let c = counts.remove(&s)?;
                Some(Aggregate {
                    runs: c.len(),
                    min: *c.iter().min()?,
                    max: *c.iter().max()?,
                    avg: c.iter().sum::<usize>() as f64 / c.len() as f64,
                    strategy: s,
                })
            })
            .collect();
        BatchReport { rows, aggregates }
    }
}

impl BatchRequest {
    /// One row per target and strategy. A target that is not a diagnosis
    /// gives an error row rather than failing the report.
    pub fn run(&self) -> Result<BatchReport, SessionError> {
        self.config.validate()?;
        let dpi = Dpi::from_envelope(&self.dpi)?;
        let mut rows = Vec::new();
        for target in &self.targets {
            for strategy in &self.strategies {
                let strategy = match (strategy, self.seed) {
                    (StrategyChoice::Random { .. }, Some(seed)) => StrategyChoice::Random { seed },
                    (s, _) => *s,
                };
                let config = SessionConfig { strategy, ..self.config.clone() };
                let start = Instant::now();
                let result = run_batch(&dpi, &config, target);
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                rows.push(match result {
                    Ok(out) => BatchRow {
                        strategy: strategy.to_string(),
                        target: target.clone(),
                        query_count: Some(out.query_count),
                        diagnosis: out.proposal.map(|p| p.diagnosis.axiom_ids),
                        status: Some(out.status),
                        wall_ms,
                        error: None,
                    },
                    Err(e @ SessionError::NotADiagnosis(_)) => BatchRow {
                        strategy: strategy.to_string(),
                        target: target.clone(),
                        query_count: None,
                        diagnosis: None,
                        status: None,
                        wall_ms,
                        error: Some(e.to_string()),
                    },
                    Err(e) => return Err(e),
                });
            }
        }
        Ok(BatchReport::from_rows(rows))
    }
}

fn default_solve_n() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub dpi: DpiEnvelope,
    #[serde(default)]
    pub fault_model: FaultModel,
    #[serde(default = "default_solve_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_ms: Option<u64>,
}

impl SolveRequest {
    pub fn run(&self) -> Result<NonInteractiveResult, SessionError> {
        let dpi = Dpi::from_envelope(&self.dpi)?;
        non_interactive_debug(&dpi, &self.fault_model, self.n, self.time_limit_ms.map(Duration::from_millis))
    }
}

/// Error body of every non-2xx response.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
