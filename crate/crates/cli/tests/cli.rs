use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gn3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gn3")).args(args).output().expect("gn3 runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    for (model, expected) in [
        ("fourier_linear", 0),
        ("radical_logarithmic", 0),
        ("counterexample_transverse", 3),
        ("lambda_gradient_violation", 4),
    ] {
        let out = gn3(&["check", "--model", &format!("builtin:{model}"), "--samples", "500", "--budget", "3000"]);
        assert_eq!(code(&out), expected, "{model}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["model"], model);
    }
}

#[test]
fn check_reads_model_files_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", gn3_core::library::bundled("trigonometric").unwrap().json);
    let out_path = dir.path().join("report.csv");
    let out = gn3(&["check", "--model", &model, "--samples", "50", "--budget", "100", "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("label,magnitude,"));
    assert!(!dir.path().join("report.partial").exists());
}

#[test]
fn configuration_errors_exit_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "bad.json", "{ not json");
    let bad_expr = write(
        dir.path(),
        "expr.json",
        &gn3_core::library::bundled("fourier_linear").unwrap().json.replace("4.2*da", "4.2*da +"),
    );
    let report = dir.path().join("r.json");
    let r = report.to_str().unwrap();
    for args in [
        vec!["check", "--model", &bad_json, "--out", r],
        vec!["check", "--model", &bad_expr, "--out", r],
        vec!["check", "--model", "builtin:nope", "--out", r],
        vec!["check", "--model", "/does/not/exist.json", "--out", r],
        vec!["check", "--model", "builtin:fourier_linear", "--budget", "0", "--out", r],
        vec!["check", "--model", "builtin:fourier_linear", "--out", "/no/such/dir/r.json"],
        vec!["lemmas", "--samples", "0", "--out", r],
        vec!["frobnicate"],
        vec!["check"],
    ] {
        let out = gn3(&args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    assert!(!report.exists());
    assert_eq!(code(&gn3(&["--help"])), 0);
}

#[test]
fn domain_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let json = gn3_core::library::bundled("fourier_linear")
        .unwrap()
        .json
        .replace("4.2*ln(300 + da)", "4.2*ln(da)");
    let model = write(dir.path(), "ln.json", &json);
    let out = gn3(&["check", "--model", &model, "--samples", "100", "--budget", "100"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn unstable_time_step_exits_six_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = gn3_core::library::scenario("type2_pulse").unwrap();
    let bad = gn3_core::sim::Scenario { dt: 0.01, ..scenario };
    let path = write(dir.path(), "s.json", &bad.to_json());
    let out_dir = dir.path().join("out");
    let out = gn3(&["simulate", "--scenario", &path, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stability limit"));
    assert!(!out_dir.exists());
}

#[test]
fn simulate_writes_summary_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = gn3(&["simulate", "--scenario", "builtin:fourier_gaussian", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["reference_l2"].as_f64().unwrap() <= 1e-3);
    let csv = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,alpha,alpha_dot,xi"));

    let stdout = gn3(&["simulate", "--scenario", "builtin:fourier_gaussian", "--format", "csv"]);
    assert_eq!(stdout.stdout, csv.as_bytes());
}

#[test]
fn lemmas_pass_and_fault_injection_exits_five() {
    let ok = gn3(&["lemmas", "--samples", "300"]);
    assert_eq!(code(&ok), 0);
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);

    let bad = gn3(&["lemmas", "--samples", "300", "--inject-fault", "--format", "text"]);
    assert_eq!(code(&bad), 5);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn single_sample_runs_succeed() {
    assert_eq!(code(&gn3(&["lemmas", "--samples", "1"])), 0);
    let out = gn3(&["check", "--model", "builtin:coupled_invariants", "--samples", "1", "--budget", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn seeds_change_reports_and_reruns_do_not() {
    let args = |seed: &'static str| ["check", "--model", "builtin:nonlinear_conductivity", "--samples", "200", "--budget", "500", "--seed", seed];
    let a = gn3(&args("1")).stdout;
    assert_eq!(a, gn3(&args("1")).stdout);
    assert_ne!(a, gn3(&args("2")).stdout);
}
