//! HTTP/JSON front end for the verifier.
//!
//! Routes:
//! - `GET  /health`
//! - `GET  /v1/experiments`: experiment names and CLI suites
//! - `POST /v1/run`: body [`RunRequest`], runs `config.experiments` in order
//! - `POST /v1/levels`: body `CfParams`, the level table
//! - `POST /v1/validate-cf`: body `CfParams`, structural checks
//! - `POST /v1/discrepancy`: star discrepancy of a point cloud
//!
//! Experiments are CPU-bound and run on the blocking pool, one request at a time
//! per handler call; results do not depend on concurrency.

use std::net::SocketAddr;

use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cfsim::api::{Catalogue, DiscrepancyRequest, DiscrepancyResponse, ErrorBody, LevelRow, RunRequest, RunResponse, ValidateResponse};
use cfsim::cf_engine::{validate_cf, CfParams, Construction};
use cfsim::equidist::{star_discrepancy, PointCloud};
use cfsim::verifier::{run_all, suite, Experiment};
use tokio::net::TcpListener;

const SUITES: [&str; 8] = ["groups", "sequences", "validate-cf", "equidist", "weakmix", "joinings", "cocycles", "all"];

/// Largest accepted Monte Carlo sample count per experiment.
pub const MAX_SAMPLES: usize = 100_000_000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError { status: StatusCode::BAD_REQUEST, message: message.into() }
    }
}

impl From<cfsim::Error> for ApiError {
    fn from(e: cfsim::Error) -> Self {
        let status = match e {
            cfsim::Error::InvalidArgument(_)
            | cfsim::Error::NTooSmall
            | cfsim::Error::NoPoints
            | cfsim::Error::DictionaryMismatch
            | cfsim::Error::Divergent => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError { status, message: e.to_string() }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError { status: r.status(), message: r.body_text() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: format!("worker failed: {e}") })?
}

async fn health() -> &'static str {
    "ok"
}

async fn experiments() -> Json<Catalogue> {
    let suites = SUITES.iter().map(|s| (s.to_string(), suite(s).expect("known suite"))).collect();
    Json(Catalogue { experiments: Experiment::ALL.to_vec(), suites })
}

async fn run(body: Result<Json<RunRequest>, JsonRejection>) -> ApiResult<RunResponse> {
    let Json(req) = body?;
    let cfg = req.config;
    if cfg.experiments.is_empty() {
        return Err(ApiError::bad_request("no experiments requested"));
    }
    let too_many = cfg.experiments.iter().map(|e| e.mc_samples.unwrap_or(cfg.mc_samples)).any(|n| n == 0 || n > MAX_SAMPLES);
    if too_many {
        return Err(ApiError::bad_request(format!("mc_samples must be in 1..={MAX_SAMPLES}")));
    }
    let names: Vec<&str> = cfg.experiments.iter().map(|e| e.name.name()).collect();
    tracing::info!(seed = cfg.seed, experiments = ?names, "run");
    let reports = blocking(move || Ok(run_all(&cfg)?)).await?;
    Ok(Json(RunResponse::new(reports)))
}

fn checked_params(p: CfParams) -> Result<CfParams, ApiError> {
    if p.max_level < 2 || p.max_level > 12 {
        return Err(ApiError::bad_request("max_level must be in 2..=12"));
    }
    if p.sample_count == 0 || p.sample_count > 65_536 {
        return Err(ApiError::bad_request("sample_count must be in 1..=65536"));
    }
    Ok(p)
}

async fn levels(body: Result<Json<CfParams>, JsonRejection>) -> ApiResult<Vec<LevelRow>> {
    let p = checked_params(body?.0)?;
    let rows = blocking(move || Ok(LevelRow::table(&Construction::build(&p)?))).await?;
    Ok(Json(rows))
}

async fn validate(body: Result<Json<CfParams>, JsonRejection>) -> ApiResult<ValidateResponse> {
    let p = checked_params(body?.0)?;
    let rep = blocking(move || Ok(validate_cf(&Construction::build(&p)?))).await?;
    let checks = rep.checks.iter().map(|c| (c.name.clone(), c.pass, c.detail.clone())).collect();
    Ok(Json(ValidateResponse { pass: rep.pass(), checks }))
}

async fn discrepancy(body: Result<Json<DiscrepancyRequest>, JsonRejection>) -> ApiResult<DiscrepancyResponse> {
    let Json(req) = body?;
    if req.dim == 0 || req.points.iter().any(|p| p.len() != req.dim || p.iter().any(|x| !(0.0..=1.0).contains(x))) {
        return Err(ApiError::bad_request("points must have `dim` coordinates in [0,1]"));
    }
    let n = req.points.len();
    let star = blocking(move || Ok(star_discrepancy(&PointCloud::new(req.dim, req.points))?)).await?;
    Ok(Json(DiscrepancyResponse { n, star }))
}

pub fn app() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/experiments", get(experiments))
        .route("/v1/run", post(run))
        .route("/v1/levels", post(levels))
        .route("/v1/validate-cf", post(validate))
        .route("/v1/discrepancy", post(discrepancy))
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, app()).await
}

/// Binds `addr` (port 0 picks one), spawns the server and returns the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(local)
}
