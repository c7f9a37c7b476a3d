//! Async client for the vote-collection service.

use reqwest::{Response, StatusCode};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use vqa_core::session::{
    read_votes, BtcDescriptor, ObserverRegistration, Playlist, SessionPlan, VoteRecord, VoteSubmission,
};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error status.
    #[error("{status}: {message}")]
    Rejected { status: StatusCode, message: String },
    #[error("malformed response: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Rejected { status, .. } => Some(*status),
            ClientError::Transport(e) => e.status(),
            ClientError::Decode(_) => None,
        }
    }

    pub fn is_conflict(&self) -> bool {
        self.status() == Some(StatusCode::CONFLICT)
    }
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

#[derive(Debug, Clone)]
pub struct VqaClient {
    base: String,
    http: reqwest::Client,
}

impl VqaClient {
    /// `base` like `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        VqaClient {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn checked(resp: Response) -> Result<Response, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let text = resp.text().await.unwrap_or_default();
        let message = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
        Err(ClientError::Rejected { status, message })
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        let resp = Self::checked(self.http.get(self.url(path)).send().await?).await?;
        Ok(resp.json().await?)
    }

    pub async fn plan(&self) -> Result<SessionPlan, ClientError> {
        self.get("/plan").await
    }

    pub async fn playlist(&self, session: usize) -> Result<Playlist, ClientError> {
        self.get(&format!("/sessions/{session}/playlist")).await
    }

    pub async fn btc(&self, btc_index: u32) -> Result<BtcDescriptor, ClientError> {
        self.get(&format!("/btc/{btc_index}")).await
    }

    /// Registers an observer; registering twice is not an error.
    pub async fn register(&self, observer_id: &str) -> Result<(), ClientError> {
        let body = ObserverRegistration {
            observer_id: observer_id.to_string(),
        };
        Self::checked(self.http.post(self.url("/observers")).json(&body).send().await?).await?;
        Ok(())
    }

    /// Returns the stored record, stamped by the service.
    pub async fn submit_vote(&self, vote: &VoteSubmission) -> Result<VoteRecord, ClientError> {
        let resp = Self::checked(self.http.post(self.url("/votes")).json(vote).send().await?).await?;
        Ok(resp.json().await?)
    }

    pub async fn export(&self) -> Result<Vec<VoteRecord>, ClientError> {
        let resp = Self::checked(self.http.get(self.url("/export")).send().await?).await?;
        let bytes = resp.bytes().await?;
        read_votes(bytes.as_ref(), "export").map_err(|e| ClientError::Decode(e.to_string()))
    }
}
