//! Thin async client for `cfsim-server`.

use cfsim::api::{Catalogue, DiscrepancyRequest, DiscrepancyResponse, ErrorBody, LevelRow, RunRequest, RunResponse, ValidateResponse};
use cfsim::cf_engine::CfParams;
use cfsim::verifier::ExperimentConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("server returned {status}: {message}")]
    Server { status: u16, message: String },
}

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` like `http://127.0.0.1:8080`; a trailing slash is ignored.
    pub fn new(base: impl Into<String>) -> Client {
        let base = base.into().trim_end_matches('/').to_string();
        Client { base, http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await.unwrap_or_default();
        let message = serde_json::from_str::<ErrorBody>(&text).map(|e| e.error).unwrap_or(text);
        Err(ClientError::Server { status: status.as_u16(), message })
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        Self::decode(self.http.post(format!("{}{path}", self.base)).json(body).send().await?).await
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        Self::decode(self.http.get(format!("{}{path}", self.base)).send().await?).await
    }

    pub async fn health(&self) -> Result<bool, ClientError> {
        let resp = self.http.get(format!("{}/health", self.base)).send().await?;
        Ok(resp.status().is_success())
    }

    pub async fn experiments(&self) -> Result<Catalogue, ClientError> {
        self.get("/v1/experiments").await
    }

    pub async fn run(&self, config: &ExperimentConfig) -> Result<RunResponse, ClientError> {
        self.post("/v1/run", &RunRequest { config: config.clone() }).await
    }

    pub async fn levels(&self, params: &CfParams) -> Result<Vec<LevelRow>, ClientError> {
        self.post("/v1/levels", params).await
    }

    pub async fn validate_cf(&self, params: &CfParams) -> Result<ValidateResponse, ClientError> {
        self.post("/v1/validate-cf", params).await
    }

    pub async fn discrepancy(&self, dim: usize, points: Vec<Vec<f64>>) -> Result<DiscrepancyResponse, ClientError> {
        self.post("/v1/discrepancy", &DiscrepancyRequest { dim, points }).await
    }
}
