//! End-to-end checks of the `commons` binary: exit codes, CSV determinism,
//! and config handling.

use std::path::Path;
use std::process::{Command, Output};

fn commons(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commons"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should start")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_reports_peak_creation_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["solve", "--k", "0.51", "--env", "ai"], tmp.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let phi_line = text
        .lines()
        .find(|l| l.trim_start().starts_with("phi"))
        .expect("phi line");
    let phi: f64 = phi_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((phi - 0.49).abs() <= 0.02, "phi = {phi}");
}

#[test]
fn solve_at_zero_stock_is_collapsed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["solve", "--k", "0", "--env", "ai"], tmp.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("collapsed          = true"));
    assert!(text.contains("h                  = 0.00000000000e0"));
}

#[test]
fn solve_with_conversion_adds_exact_shift() {
    let tmp = tempfile::tempdir().unwrap();
    let grab_h = |eta: &str| -> f64 {
        let out = commons(
            &["solve", "--k", "1", "--env", "ai", "--eta", eta],
            tmp.path(),
        );
        assert!(out.status.success());
        stdout(&out)
            .lines()
            .find(|l| l.trim_start().starts_with("h "))
            .unwrap()
            .split('=')
            .nth(1)
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    let h0 = grab_h("0");
    let h25 = grab_h("0.25");
    // Delta (1 - pi) * 0.25 * a_H(1) with the AI baseline rate 0.5.
    let expect = 0.6 * 0.25 * (1.0 - (-0.5_f64).exp());
    assert!((h25 - h0 - expect).abs() < 1e-9, "shift = {}", h25 - h0);
}

#[test]
fn steady_writes_expected_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["steady", "--env", "ai", "--out", "o"], tmp.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("o/steady.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k_star,kind,residual");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("unstable"));
    assert!(lines[2].contains("stable"));
    let k_u: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    let k_h: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
    assert!((k_u - 0.15).abs() <= 0.02);
    assert!((k_h - 1.55).abs() <= 0.03);
}

#[test]
fn eta_command_reports_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["eta", "--out", "o"], tmp.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("feasible = true"), "{text}");
    let val: f64 = text
        .lines()
        .next()
        .unwrap()
        .split('=')
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((val - 0.51).abs() <= 0.02, "eta_bar = {val}");
}

#[test]
fn sensitivity_emits_seven_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(
        &["sensitivity", "--preset", "appendix-d", "--out", "o"],
        tmp.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("o/sensitivity.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "run,parameter,value,k_u_ai,k_h_ai,peak_phi_ai,k_ho,two_crossings"
    );
    assert_eq!(lines.len(), 8, "header plus seven runs");
    assert!(lines.iter().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| -> (Vec<u8>, Vec<u8>) {
        let out = commons(
            &[
                "curve",
                "--env",
                "ai",
                "--grid",
                "0.05:2.0:50",
                "--out",
                dir,
            ],
            tmp.path(),
        );
        assert!(out.status.success());
        let curve = std::fs::read(tmp.path().join(dir).join("curve.csv")).unwrap();
        let out = commons(&["steady", "--env", "ho", "--out", dir], tmp.path());
        assert!(out.status.success());
        let steady = std::fs::read(tmp.path().join(dir).join("steady.csv")).unwrap();
        (curve, steady)
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first.0, second.0);
    assert_eq!(first.1, second.1);
}

#[test]
fn config_overrides_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"shared": {"kappa": 3.0}}"#).unwrap();
    let out = commons(
        &[
            "steady", "--env", "ai", "--config", "cfg.json", "--out", "o",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("o/steady.csv")).unwrap();
    let k_u: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    // Slower cost decay activates the platform later.
    assert!((k_u - 0.31).abs() <= 0.02, "k_u = {k_u}");
}

#[test]
fn malformed_config_exits_one_with_field_message() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), r#"{"shared": {"kapa": 3.0}}"#).unwrap();
    let out = commons(
        &["solve", "--k", "1", "--env", "ai", "--config", "bad.json"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("kapa"), "stderr should name the field: {err}");
}

#[test]
fn bad_flag_values_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        ["solve", "--k", "-1", "--env", "ai"].as_slice(),
        ["solve", "--k", "1", "--env", "ho", "--eta", "0.5"].as_slice(),
        ["solve", "--k", "1", "--env", "nope"].as_slice(),
        ["curve", "--env", "ai", "--grid", "0:1"].as_slice(),
    ] {
        let out = commons(args, tmp.path());
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
    }
}

#[test]
fn unknown_preset_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["sensitivity", "--preset", "nope"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solver_failures_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    // A race at a collapsed reference stock cannot form its ratios.
    let out = commons(&["race", "--k", "0.01"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["--help"], tmp.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("solve"));
}

#[test]
fn simulate_to_the_stable_state() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(
        &["simulate", "--k0", "0.5", "--env", "ai", "--out", "o"],
        tmp.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("converged = true"));
    let csv = std::fs::read_to_string(tmp.path().join("o/trajectory.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let k: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((k - 1.5535).abs() < 0.01, "limit = {k}");
}

#[test]
fn t_life_reports_lifetime_matching() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(
        &["solve", "--k", "0.2", "--env", "ai", "--t-life", "3"],
        tmp.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("3-period query lifetime"));
    assert!(text.contains("sigma_lifetime"));
}

#[test]
fn validate_passes_on_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commons(&["validate"], tmp.path());
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("required checks passed"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn validate_reports_shutdown_violation_without_failing() {
    // A cheap empty-archive answering cost breaks the shutdown precondition;
    // the check is informational and the run still exits 0.
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("cfg.json"),
        r#"{"shared": {"c_bar_cost": 1.0}}"#,
    )
    .unwrap();
    let out = commons(&["validate", "--config", "cfg.json"], tmp.path());
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("violated"), "{text}");
    assert!(text.contains("[info] empty_archive_shutdown"), "{text}");
}
