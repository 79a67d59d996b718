//! Automatic sessions answered by a target diagnosis, and the
//! non-interactive best-first debugger.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diagnosis::{Diagnosis, HsTree};
use crate::logic::{AxiomSet, Dpi, Reasoner};
use crate::probability::{axiom_probs, diagnosis_prior, FaultModel};
use crate::query::Answer;

use super::{start_session, submit_answer, HistoryEntry, RepairProposal, SessionConfig, SessionError, SessionState, SessionStatus};

/// Guard against a session that never settles.
const MAX_QUERIES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub proposal: Option<RepairProposal>,
    pub query_count: usize,
    pub history: Vec<HistoryEntry>,
    pub status: SessionStatus,
}

/// Yes iff (O \ target) ∪ B ∪ ⋃P entails every formula of the pending query.
pub fn oracle_answer(state: &SessionState, target: &AxiomSet) -> Result<Option<Answer>, SessionError> {
    let Some(entry) = &state.pending else { return Ok(None) };
    let r = Reasoner::with_extra(&state.dpi, &entry.query.formulas, state.config.witness_budget)?;
    Ok(Some(if r.entails_without(target, &entry.query.formulas) { Answer::Yes } else { Answer::No }))
}

/// Run a session to the end with `target` answering every query. The
/// target must be a minimal diagnosis.
pub fn run_batch(dpi: &Dpi, config: &SessionConfig, target: &AxiomSet) -> Result<BatchOutcome, SessionError> {
    let ids = dpi.kb_ids();
    let r = Reasoner::with_extra(dpi, &[], config.witness_budget)?;
    let minimal = target.iter().all(|a| {
        let mut smaller = target.clone();
        smaller.remove(a);
        !r.valid_without(&smaller)
    });
    if !target.iter().all(|a| ids.contains(a)) || !r.valid_without(target) || !minimal {
        return Err(SessionError::NotADiagnosis(target.clone()));
    }
    let mut state = start_session(dpi.clone(), config.clone())?;
    while let Some(answer) = oracle_answer(&state, target)? {
        if state.history.len() >= MAX_QUERIES {
            break;
        }
        submit_answer(&mut state, answer.into())?;
    }
    Ok(BatchOutcome {
        proposal: state.proposal(),
        query_count: state.answered(),
        history: state.history,
        status: state.status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonInteractiveResult {
    /// Most probable first. Posteriors are priors normalized over the list.
    pub diagnoses: Vec<Diagnosis>,
    /// False when the time limit cut the search short.
    pub complete: bool,
}

/// Up to `n` most probable minimal diagnoses, best-first.
pub fn non_interactive_debug(
    dpi: &Dpi,
    model: &FaultModel,
    n: usize,
    time_limit: Option<Duration>,
) -> Result<NonInteractiveResult, SessionError> {
    model.validate()?;
    let start = Instant::now();
    let probs = axiom_probs(&dpi.kb, model);
    let r = Reasoner::new(dpi)?;
    let mut tree = HsTree::new(&r, &probs)?;
    let mut found: Vec<AxiomSet> = Vec::new();
    let mut complete = true;
    while found.len() < n {
        if time_limit.is_some_and(|t| start.elapsed() > t) {
            complete = false;
            break;
        }
        match tree.next() {
            Some(d) => found.push(d),
            None => break,
        }
    }
    let ids = dpi.kb_ids();
    let priors: Vec<f64> = found.iter().map(|d| diagnosis_prior(d, &ids, &probs)).collect();
    let total: f64 = priors.iter().sum();
    let diagnoses = found
        .into_iter()
        .zip(priors)
        .map(|(axiom_ids, prior)| Diagnosis { axiom_ids, prior, posterior: if total > 0.0 { prior / total } else { 0.0 } })
        .collect();
    Ok(NonInteractiveResult { diagnoses, complete })
}
