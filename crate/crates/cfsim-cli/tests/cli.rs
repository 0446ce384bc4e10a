use std::fs;
use std::process::Command;

fn cfsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cfsim"))
}

#[test]
fn cocycles_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfsim().args(["cocycles", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    let names: Vec<&str> = report["experiments"].as_array().unwrap().iter().map(|e| e["experiment"].as_str().unwrap()).collect();
    assert_eq!(names, ["double_extension", "square_roots"]);
    let csv = fs::read_to_string(dir.path().join("square_roots.csv")).unwrap();
    assert!(csv.starts_with("t,commutes,expected\n"));
}

#[test]
fn config_file_and_flags_combine_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 7, "experiments": [{"name": "fubini"}, {"name": "groups"}]}"#).unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        let st = cfsim().args(["all", "--samples", "3000", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
        assert!(st.status.success());
        outputs.push((fs::read(out_dir.join("report.json")).unwrap(), fs::read(out_dir.join("fubini.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    // A suite keeps only its own entries from the config.
    let out_dir = dir.path().join("eq");
    let st = cfsim().args(["equidist", "--samples", "3000", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(st.status.success());
    assert!(out_dir.join("fubini.csv").exists() && !out_dir.join("groups.csv").exists());
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfsim().args(["sequences", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    let out = cfsim().args(["groups", "--server", "http://127.0.0.1:1", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = cfsim().args(["weakmix", "--samples", "0", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mc_samples"));
}
