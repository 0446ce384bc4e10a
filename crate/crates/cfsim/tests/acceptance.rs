//! Acceptance suite: one line per criterion, at default desk-scale settings.
//!
//! Run with `cargo test -p cfsim --test acceptance -- --nocapture` to see the lines.

use std::fs;
use std::time::{Duration, Instant};

use cfsim::verifier::{emit_report, run_all, run_experiment, CheckReport, Experiment, ExperimentConfig, ExperimentEntry};

struct Line {
    id: usize,
    what: &'static str,
    pass: bool,
    detail: String,
}

fn timed(cfg: &ExperimentConfig, e: Experiment) -> (CheckReport, Duration) {
    let t = Instant::now();
    let r = run_experiment(cfg, &ExperimentEntry::new(e)).unwrap_or_else(|err| panic!("{}: {err}", e.name()));
    (r, t.elapsed())
}

fn failing(r: &CheckReport) -> String {
    let bad: Vec<String> =
        r.metrics.iter().filter(|m| !m.pass).map(|m| format!("{}={:.3e} (bound {:.3e})", m.name, m.value, m.bound)).collect();
    if bad.is_empty() {
        format!("{} metrics", r.metrics.len())
    } else {
        bad.join("; ")
    }
}

fn metrics_pass(r: &CheckReport, names: &[&str]) -> bool {
    names.iter().all(|n| r.metric(n).is_some_and(|m| m.pass))
}

fn line(id: usize, what: &'static str, reports: &[&CheckReport], extra: bool, elapsed: Duration, limit: Duration) -> Line {
    let ok = reports.iter().all(|r| r.passed()) && extra && elapsed <= limit;
    let detail = reports.iter().map(|r| format!("{}: {}", r.experiment, failing(r))).collect::<Vec<_>>().join(" | ");
    Line { id, what, pass: ok, detail: format!("{detail} [{:.2?} / limit {:.0?}]", elapsed, limit) }
}

#[test]
fn acceptance() {
    let cfg = ExperimentConfig::default();
    let mut lines = Vec::new();
    let secs = Duration::from_secs;

    let (groups, t_groups) = timed(&cfg, Experiment::Groups);
    let table = ["d6_associativity_failures", "d6_a_times_b_is_d", "d6_b_times_a_is_f"];
    lines.push(Line {
        id: 1,
        what: "dihedral table: 216 associativity triples, a*b = d, b*a = f",
        pass: metrics_pass(&groups, &table),
        detail: format!("{} metrics", table.len()),
    });
    lines.push(line(2, "G arithmetic on 1e4 elements and the center", &[&groups], true, t_groups, secs(1)));

    let (seq, t) = timed(&cfg, Experiment::Sequences);
    lines.push(line(3, "level recursion, ratio identity, cylinder consistency, normalizer tail", &[&seq], true, t, secs(1)));

    let (cf, t) = timed(&cfg, Experiment::ValidateCf);
    lines.push(line(4, "(C,F) conditions and tiling by exact interval arithmetic", &[&cf], true, t, secs(1)));

    let (eq, t) = timed(&cfg, Experiment::Equidist);
    lines.push(line(5, "grid and radical-inverse discrepancy, Koksma-Hlawka domination", &[&eq], true, t, secs(30)));

    let (ss, t) = timed(&cfg, Experiment::SampleSets);
    lines.push(line(6, "sample sets within eps_n, pair distribution, identity boundary shifts", &[&ss], true, t, secs(300)));

    let (wm, t) = timed(&cfg, Experiment::WeakMixing);
    lines.push(line(7, "weak-mixing deviations within budget + 4 sigma, decreasing trend", &[&wm], true, t, secs(600)));

    let (la, t1) = timed(&cfg, Experiment::LocalAveraging);
    let (fu, t2) = timed(&cfg, Experiment::Fubini);
    let sym = (3..=6).map(|n| format!("symmetric_difference_n{n}")).collect::<Vec<_>>();
    let sym_ok = metrics_pass(&la, &sym.iter().map(String::as_str).collect::<Vec<_>>());
    lines.push(line(
        8,
        "translated-band symmetric differences exact, Fubini agreement within 4 sigma",
        &[&la, &fu],
        sym_ok,
        t1 + t2,
        secs(300),
    ));

    let (jo, t) = timed(&cfg, Experiment::Joinings);
    lines.push(line(9, "joining classification at window 4 with margins above 4 sigma", &[&jo], true, t, secs(600)));

    let (de, t) = timed(&cfg, Experiment::DoubleExtension);
    lines.push(line(10, "double extension: lifting equation, obstruction, spectral probe", &[&de], true, t, secs(120)));

    let (sr, t) = timed(&cfg, Experiment::SquareRoots);
    lines.push(line(11, "square roots in D6 and the SU(2) commutation grid", &[&sr], true, t, secs(60)));

    let quick = ExperimentConfig { mc_samples: 100_000, ..ExperimentConfig::default() };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        emit_report(&run_all(&quick).unwrap(), d.path()).unwrap();
    }
    let mut files: Vec<_> = fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    let same = files.len() == Experiment::ALL.len() + 1
        && files.iter().all(|f| fs::read(dirs[0].path().join(f)).unwrap() == fs::read(dirs[1].path().join(f)).unwrap());
    lines.push(Line {
        id: 12,
        what: "two identical runs give byte-identical report.json and CSVs",
        pass: same,
        detail: format!("{} files", files.len()),
    });

    for l in &lines {
        println!("criterion {:>2} {} {} ({})", l.id, if l.pass { "PASS" } else { "FAIL" }, l.what, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
