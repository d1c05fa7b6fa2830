//! End-to-end runs of the `morawetz` binary: exit codes, report files, and
//! byte-level determinism across seeds and thread counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use morawetz_cli::output::strip_timestamp_line;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morawetz"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn run(subcommand: &str, config: Option<&Path>, out: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg(subcommand).arg("--out").arg(out);
    if let Some(cfg) = config {
        cmd.arg("--config").arg(cfg);
    }
    cmd.args(extra);
    cmd.env_remove("MORAWETZ_THREADS");
    cmd.output().unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process exited normally")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stripped(path: &Path) -> String {
    let raw = fs::read_to_string(path).unwrap();
    let kept = strip_timestamp_line(&raw);
    assert_eq!(
        raw.lines().count(),
        kept.lines().count() + 1,
        "{} should carry exactly one timestamp line",
        path.display()
    );
    kept
}

#[test]
fn pinned_alpha_verifies_and_scan_alpha_tabulates() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"alpha": 10.0}"#);
    let out = tmp.path().join("verify");
    let output = run("verify", Some(&cfg), &out, &[]);
    assert_eq!(code(&output), 0, "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["parameter_source"], "pinned");
    assert_eq!(report["certification"]["verdict"], true);
    let checks = report["certification"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(out.join("margins.csv").exists());

    let scan_cfg =
        write_config(tmp.path(), r#"{"scan": {"alpha_min": 5.0, "alpha_max": 20.0, "points": 3}}"#);
    let scan_out = tmp.path().join("scan");
    let output = run("scan-alpha", Some(&scan_cfg), &scan_out, &[]);
    assert_eq!(code(&output), 0);
    let table = stripped(&scan_out.join("scan.csv"));
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,c_star,margin_lower_bound_coefficient,margin_h_function,margin_ratio_bound,margin_midrange_exact,passed"
    );
    assert_eq!(lines.count(), 3);
    let summary = read_json(&scan_out.join("scan.json"));
    assert!(summary["scan"]["certified_alpha"].as_f64().unwrap() > 0.0);
}

#[test]
fn failing_alpha_exits_two_with_reports_on_disk() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"alpha": 1.0}"#);
    let out = tmp.path().join("out");
    let output = run("verify", Some(&cfg), &out, &[]);
    assert_eq!(code(&output), 2);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["certification"]["verdict"], false);
}

#[test]
fn configuration_problems_exit_one() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");

    let malformed = write_config(tmp.path(), "not json");
    assert_eq!(code(&run("verify", Some(&malformed), &out, &[])), 1);

    let unknown = write_config(tmp.path(), r#"{"alphaa": 2.0}"#);
    assert_eq!(code(&run("verify", Some(&unknown), &out, &[])), 1);

    let negative = write_config(tmp.path(), r#"{"mass": -1.0}"#);
    assert_eq!(code(&run("verify", Some(&negative), &out, &[])), 1);

    let empty_modes =
        write_config(tmp.path(), r#"{"constants": {"ell_min": 5, "ell_max": 3}}"#);
    assert_eq!(code(&run("constants", Some(&empty_modes), &out, &[])), 1);

    let zero_runs = write_config(tmp.path(), r#"{"ensemble": {"runs": 0}}"#);
    assert_eq!(code(&run("check-theorem1", Some(&zero_runs), &out, &[])), 1);
}

#[test]
fn runaway_evolution_exits_three() {
    let tmp = TempDir::new().unwrap();
    // Marginal time step: the potential pushes the amplification factor of
    // the highest lattice mode past one, so the norm guard trips mid-run.
    let cfg = write_config(
        tmp.path(),
        r#"{"solver": {"courant": 1.0, "t_final": 150.0, "refinements": 0}}"#,
    );
    let out = tmp.path().join("out");
    let output = run("evolve", Some(&cfg), &out, &[]);
    assert_eq!(code(&output), 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unstable"), "stderr: {stderr}");
}

#[test]
fn flat_oracle_translates_at_second_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"solver": {"flat": true}}"#);
    let out = tmp.path().join("out");
    let output = run("evolve", Some(&cfg), &out, &[]);
    assert_eq!(code(&output), 0, "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report = read_json(&out.join("evolve.json"));
    assert_eq!(report["mode"], "flat");
    assert_eq!(report["passed"], true);
    let orders = report["orders"].as_array().unwrap();
    assert!(orders.last().unwrap().as_f64().unwrap() >= 1.9);
}

#[test]
fn zero_data_runs_write_zero_content() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"solver": {"amplitude": 0.0, "refinements": 0}}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(code(&run("evolve", Some(&cfg), &out, &[])), 0);
    let report = read_json(&out.join("evolve.json"));
    let totals = report["totals"].as_object().unwrap();
    for key in ["bulk_kernel", "bulk_kernel_plus_aux", "bulk_controlled", "data_norm", "max_abs_phi"] {
        assert_eq!(totals[key].as_f64().unwrap(), 0.0, "{key} should vanish");
    }
    for line in stripped(&out.join("run.csv")).lines().skip(1) {
        for field in line.split(',').skip(1) {
            assert_eq!(field.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn outputs_are_identical_across_threads_and_reruns() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"seed": 11, "ensemble": {"runs": 4, "h": 0.2}}"#,
    );
    let mut snapshots = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "4"), ("c", "4")] {
        let out = tmp.path().join(label);
        let output = run("check-theorem1", Some(&cfg), &out, &["--threads", threads]);
        assert_eq!(code(&output), 0, "stderr: {}", String::from_utf8_lossy(&output.stderr));
        snapshots.push((
            stripped(&out.join("ensemble.json")),
            stripped(&out.join("ensemble.csv")),
        ));
    }
    assert_eq!(snapshots[0], snapshots[1], "thread count changed the bytes");
    assert_eq!(snapshots[1], snapshots[2], "a rerun changed the bytes");
}

#[test]
fn seed_flag_overrides_the_configured_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"seed": 11, "ensemble": {"runs": 2, "h": 0.2}}"#);
    let base = tmp.path().join("base");
    let reseeded = tmp.path().join("reseeded");
    assert_eq!(code(&run("check-theorem1", Some(&cfg), &base, &[])), 0);
    assert_eq!(code(&run("check-theorem1", Some(&cfg), &reseeded, &["--seed", "12"])), 0);
    assert_ne!(
        stripped(&base.join("ensemble.csv")),
        stripped(&reseeded.join("ensemble.csv")),
        "a different seed should draw different data"
    );
}

#[test]
fn thread_environment_variable_is_honored_and_overridden() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"alpha": 10.0}"#);
    let out = tmp.path().join("out");

    let mut cmd = bin();
    cmd.args(["verify", "--config"]).arg(&cfg).arg("--out").arg(&out);
    cmd.env("MORAWETZ_THREADS", "2");
    assert_eq!(code(&cmd.output().unwrap()), 0);

    let mut cmd = bin();
    cmd.args(["verify", "--config"]).arg(&cfg).arg("--out").arg(&out);
    cmd.env("MORAWETZ_THREADS", "zero");
    assert_eq!(code(&cmd.output().unwrap()), 1, "an unparsable variable is an error");

    let mut cmd = bin();
    cmd.args(["verify", "--config"]).arg(&cfg).arg("--out").arg(&out);
    cmd.env("MORAWETZ_THREADS", "zero");
    cmd.args(["--threads", "2"]);
    assert_eq!(code(&cmd.output().unwrap()), 0, "the flag wins without reading the variable");
}

#[test]
fn usage_errors_and_help_use_reserved_exit_codes() {
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for name in ["verify", "scan-alpha", "constants", "evolve", "check-theorem1"] {
        assert!(text.contains(name), "help should list {name}");
    }

    let unknown = bin().arg("frobnicate").output().unwrap();
    assert_eq!(unknown.status.code(), Some(1), "usage errors must not collide with exit 2");

    let missing_value = bin().args(["verify", "--threads"]).output().unwrap();
    assert_eq!(missing_value.status.code(), Some(1));
}
