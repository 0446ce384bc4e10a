//! `cfsim`: runs experiment suites through the HTTP service and writes
//! `report.json` plus one CSV per experiment. Without `--server` an embedded
//! server is started on a loopback port for the duration of the run.

use std::path::PathBuf;
use std::process::ExitCode;

use cfsim::verifier::{emit_report, suite, ExperimentConfig, ExperimentEntry, Status};
use cfsim_client::Client;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfsim", version, about = "Numerical checks for a rank-one (C,F)-action and its joinings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON); flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for both the construction and the Monte Carlo streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Monte Carlo samples per experiment.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Base URL of a running `cfsim-server`.
    #[arg(long, global = true)]
    server: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Level recursion, ratio identity, measure bookkeeping.
    Sequences,
    /// Structural (C,F) conditions.
    ValidateCf,
    /// Discrepancy, sample sets, local averages, Fubini exchange.
    Equidist,
    /// Correlation decay of the time-2 map.
    Weakmix,
    /// Self-joining classification along Folner windows.
    Joinings,
    /// Double extension and square-root checks.
    Cocycles,
    /// Group arithmetic and the dihedral table.
    Groups,
    /// Every experiment in the config (all of them by default).
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sequences => "sequences",
            Command::ValidateCf => "validate-cf",
            Command::Equidist => "equidist",
            Command::Weakmix => "weakmix",
            Command::Joinings => "joinings",
            Command::Cocycles => "cocycles",
            Command::Groups => "groups",
            Command::All => "all",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.construction.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if cli.level.is_some() {
        cfg.level = cli.level;
    }
    if let Some(n) = cli.samples {
        cfg.mc_samples = n;
        for e in &mut cfg.experiments {
            e.mc_samples = None;
        }
    }
    if !matches!(cli.command, Command::All) {
        let wanted = suite(cli.command.name()).expect("every subcommand is a suite");
        let kept: Vec<ExperimentEntry> = cfg.experiments.iter().filter(|e| wanted.contains(&e.name)).cloned().collect();
        cfg.experiments = if kept.is_empty() { wanted.into_iter().map(ExperimentEntry::new).collect() } else { kept };
    }
    Ok(cfg)
}

async fn run(cli: Cli) -> Result<bool, String> {
    let cfg = load_config(&cli)?;
    let base = match &cli.server {
        Some(url) => url.clone(),
        None => {
            let addr = cfsim_server::spawn(([127, 0, 0, 1], 0).into()).await.map_err(|e| format!("embedded server: {e}"))?;
            format!("http://{addr}")
        }
    };
    let client = Client::new(base);
    let resp = client.run(&cfg).await.map_err(|e| e.to_string())?;
    let reports = resp.into_reports();
    for r in &reports {
        let failed: Vec<&str> = r.metrics.iter().filter(|m| !m.pass).map(|m| m.name.as_str()).collect();
        let tag = if r.status == Status::Pass { "PASS" } else { "FAIL" };
        if failed.is_empty() {
            println!("{tag} {} ({} checks)", r.experiment, r.metrics.len());
        } else {
            println!("{tag} {} failing: {}", r.experiment, failed.join(", "));
        }
    }
    let ok = emit_report(&reports, &cfg.output_dir).map_err(|e| e.to_string())?;
    println!("wrote {}", cfg.output_dir.join("report.json").display());
    Ok(ok)
}

#[tokio::main]
async fn main() -> ExitCode {
    match run(Cli::parse()).await {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
