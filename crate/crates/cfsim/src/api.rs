//! Request and response bodies shared by the HTTP service and its client.

use serde::{Deserialize, Serialize};

use crate::cf_engine::{CfParams, Construction};
use crate::verifier::{CheckReport, CsvTable, Experiment, ExperimentConfig, Status};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub config: ExperimentConfig,
}

/// A report together with the tables that `report.json` leaves out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireReport {
    #[serde(flatten)]
    pub report: CheckReport,
    pub tables: Vec<CsvTable>,
}

impl WireReport {
    pub fn new(report: CheckReport) -> WireReport {
        let tables = report.tables.clone();
        WireReport { report, tables }
    }

    pub fn into_report(self) -> CheckReport {
        CheckReport { tables: self.tables, ..self.report }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResponse {
    pub status: Status,
    pub experiments: Vec<WireReport>,
}

impl RunResponse {
    pub fn new(reports: Vec<CheckReport>) -> RunResponse {
        let status = if reports.iter().all(CheckReport::passed) { Status::Pass } else { Status::Fail };
        RunResponse { status, experiments: reports.into_iter().map(WireReport::new).collect() }
    }

    pub fn into_reports(self) -> Vec<CheckReport> {
        self.experiments.into_iter().map(WireReport::into_report).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalogue {
    pub experiments: Vec<Experiment>,
    /// `(subcommand, experiments)`.
    pub suites: Vec<(String, Vec<Experiment>)>,
}

/// One row of the level table. Integers travel as strings: they exceed `u64` by level 8.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: usize,
    pub a: String,
    pub a_tilde: String,
    pub card_c: i64,
    pub ratio: f64,
    pub mu_x: f64,
}

impl LevelRow {
    pub fn table(cons: &Construction) -> Vec<LevelRow> {
        cons.levels
            .iter()
            .map(|l| LevelRow {
                n: l.n,
                a: l.a.to_string(),
                a_tilde: l.a_tilde.to_string(),
                card_c: l.card_c(),
                ratio: l.a_tilde as f64 / l.a as f64,
                mu_x: cons.mu_x[l.n],
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub pass: bool,
    /// `(check, pass, detail)`.
    pub checks: Vec<(String, bool, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRequest {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResponse {
    pub n: usize,
    pub star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

/// Construction parameters as posted to `/v1/levels` and `/v1/validate-cf`.
pub type ParamsRequest = CfParams;
