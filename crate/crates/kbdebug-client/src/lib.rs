//! Blocking client for the session service.

use kbdebug::api::{
    AnswerRequest, BatchReport, BatchRequest, CreateSessionRequest, DiagnosesView, ErrorBody, SessionDetail, SessionView, SolveRequest,
};
use kbdebug::session::{NonInteractiveResult, Reply};
use reqwest::blocking::{Client as Http, RequestBuilder};
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The server answered with a non-success status.
    #[error("{status}: {message}")]
    Api { status: StatusCode, message: String },
    #[error(transparent)]
    Transport(#[from] reqwest::Error),
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Transport(e) => e.status(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: Http,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Client {
        Client { base: base.trim_end_matches('/').to_string(), http: Http::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn send<T: DeserializeOwned>(req: RequestBuilder) -> Result<T> {
        let resp = req.send()?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json()?);
        }
        let text = resp.text()?;
        let message = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
        Err(ClientError::Api { status, message })
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        Client::send(self.http.post(self.url(path)).json(body))
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        Client::send(self.http.get(self.url(path)))
    }

    pub fn health(&self) -> Result<()> {
        self.http.get(self.url("/health")).send()?.error_for_status()?;
        Ok(())
    }

    pub fn create_session(&self, req: &CreateSessionRequest) -> Result<SessionView> {
        self.post("/sessions", req)
    }

    pub fn session(&self, id: &str) -> Result<SessionDetail> {
        self.get(&format!("/sessions/{id}"))
    }

    pub fn answer(&self, id: &str, answer: Reply) -> Result<SessionView> {
        self.post(&format!("/sessions/{id}/answer"), &AnswerRequest { answer })
    }

    pub fn abort(&self, id: &str) -> Result<SessionView> {
        Client::send(self.http.post(self.url(&format!("/sessions/{id}/abort"))))
    }

    pub fn diagnoses(&self, id: &str) -> Result<DiagnosesView> {
        self.get(&format!("/sessions/{id}/diagnoses"))
    }

    pub fn batch(&self, req: &BatchRequest) -> Result<BatchReport> {
        self.post("/debug/batch", req)
    }

    pub fn solve(&self, req: &SolveRequest) -> Result<NonInteractiveResult> {
        self.post("/debug/solve", req)
    }
}
