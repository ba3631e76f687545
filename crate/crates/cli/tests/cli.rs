use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn state_prep_round_trip() {
    let v = json(&run(&["state-prep", "--chi", "1.7", "--half-n", "1"]));
    let fidelity = v["result"]["fidelity"].as_f64().unwrap();
    assert!((fidelity - 1.0).abs() <= 1e-10);
    assert_eq!(v["command"], "state-prep");
    assert_eq!(v["tool"], "lossphase");
    assert!(v["version"].is_string() && v["wall_time_ms"].is_number());
    assert_eq!(v["config"]["chi"], 1.7);
}

#[test]
fn state_prep_chi_zero_four_photons() {
    // (b₁†² + b₂†²)² |0,0⟩ ∝ √24|4,0⟩ + 2·√4|2,2⟩ + √24|0,4⟩
    let v = json(&run(&["state-prep", "--chi", "0", "--half-n", "2"]));
    let amps: Vec<f64> = v["result"]["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["re"].as_f64().unwrap())
        .collect();
    let norm = (24.0f64 + 16.0 + 24.0).sqrt();
    let expected = [24f64.sqrt() / norm, 0.0, 4.0 / norm, 0.0, 24f64.sqrt() / norm];
    for (a, e) in amps.iter().zip(expected) {
        assert!((a.abs() - e).abs() < 1e-12, "{amps:?}");
    }
}

#[test]
fn out_of_range_chi_is_a_usage_error() {
    assert_eq!(code(&run(&["state-prep", "--chi", "3"])), 2);
    assert_eq!(code(&run(&["evaluate", "--n1", "1", "--eta", "1.5"])), 2);
    assert_eq!(code(&run(&["evaluate", "--n2", "1", "--eta", "0.6"])), 2);
    assert_eq!(code(&run(&["fisher-scan", "--n-photons", "3"])), 2);
    assert_eq!(code(&run(&["evaluate", "--bogus"])), 2);
}

#[test]
fn evaluate_single_photon_is_analytic() {
    let v = json(&run(&["evaluate", "--n1", "1", "--eta", "0.6", "--method", "exact"]));
    let mu = v["result"]["report"]["mu"].as_f64().unwrap();
    assert!((mu - 0.3).abs() <= 1e-12);
    let var = v["result"]["report"]["holevo_variance"].as_f64().unwrap();
    assert!((var - (4.0 / 0.36 - 1.0)).abs() <= 1e-9);
}

#[test]
fn evaluate_seven_singles_one_pair_regression() {
    let v = json(&run(&[
        "evaluate", "--n1", "7", "--n2", "1", "--chi2", "1.7", "--eta", "0.6", "--method", "speedup",
    ]));
    let var = v["result"]["report"]["holevo_variance"].as_f64().unwrap();
    assert!((var - 0.2963458477377179).abs() <= 1e-12, "{var}");
    assert_eq!(v["result"]["report"]["method"], "exact_with_speedup");
}

#[test]
fn thirty_photon_exact_trips_the_guard() {
    let out = run(&[
        "evaluate", "--n1", "2", "--n2", "2", "--chi2", "1.8", "--n4", "6", "--chi4", "1.3", "--eta", "0.6", "--method",
        "exact",
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard"));
}

#[test]
fn fisher_scan_csv_and_pi_token() {
    let token = run(&["fisher-scan", "--eta", "0.6", "--phi", "pi/4", "--theta", "0"]);
    let literal = run(&["fisher-scan", "--eta", "0.6", "--phi", "0.7853981633974483", "--theta", "0"]);
    assert_eq!(code(&token), 0);
    assert_eq!(token.stdout, literal.stdout);
    let text = String::from_utf8(token.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("chi,fisher"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn fisher_scan_degenerate_grid_has_one_row() {
    let out = run(&["fisher-scan", "--chi-min", "0.5", "--chi-max", "0.6", "--chi-step", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
}

#[test]
fn fisher_scan_divergent_points_are_nan() {
    // just past φ − θ = π a lossless outcome has zero probability and nonzero slope
    let out = run(&[
        "fisher-scan", "--eta", "1", "--phi", "3.14159365", "--theta", "0", "--chi-min", "0", "--chi-max", "0",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "chi,fisher\n0.0,nan\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn probs_csv_has_every_outcome() {
    let out = run(&["probs", "--n-photons", "2", "--chi", "1", "--eta", "0.6", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "L,k,d,re,im");
    // one row per harmonic: 3 outcomes × 5, 2 × 3, 1 × 1
    assert_eq!(rows.len(), 1 + 15 + 6 + 1);
}

#[test]
fn optimize_small_budget_is_fast_and_beats_sql() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("opt.json");
    let start = Instant::now();
    let out = run(&["optimize", "--n", "3", "--eta", "1.0", "--output", path.to_str().unwrap()]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(code(&out), 0);
    let v = read_json(&path);
    let best = v["result"]["optimization"]["best_variance"].as_f64().unwrap();
    let sql = v["result"]["sql_baseline"].as_f64().unwrap();
    assert!(best <= sql);
    let pareto = std::fs::read_to_string(dir.path().join("opt.json.pareto.csv")).unwrap();
    assert_eq!(
        pareto.lines().next(),
        Some("n1,n2,chi2,n4,chi4,eta,mu,holevo_variance,branches,method")
    );
}

#[test]
fn optimize_nine_photons_finds_table_row() {
    let v = json(&run(&["optimize", "--n", "9", "--eta", "0.6", "--chi-step", "0.1"]));
    let plan = &v["result"]["optimization"]["best_plan"];
    assert_eq!((plan["n1"].as_u64(), plan["n2"].as_u64(), plan["n4"].as_u64()), (Some(7), Some(1), Some(0)));
    let chi2 = plan["chi2"].as_f64().unwrap();
    assert!([1.6, 1.7, 1.8].iter().any(|c| (c - chi2).abs() < 1e-9), "{chi2}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, r#"{"n1": 2, "eta": 0.3, "seed": 5, "method": "mc", "trials": 200}"#).unwrap();
    let out_path = dir.path().join("e.csv");
    let out = run(&[
        "evaluate", "--config", config.to_str().unwrap(), "--eta", "0.6", "--format", "csv", "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let meta = read_json(&dir.path().join("e.csv.meta.json"));
    assert_eq!(meta["config"]["eta"], 0.6);
    assert_eq!(meta["config"]["n1"], 2);
    assert_eq!(meta["seed"], 5);
    assert!(std::fs::read_to_string(&out_path).unwrap().starts_with("mu,"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, "[1, 2]").unwrap();
    assert_eq!(code(&run(&["evaluate", "--config", config.to_str().unwrap()])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["evaluate", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&["state-prep", "--chi", "1", "--output", "/nonexistent-dir/x.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn identical_config_and_seed_give_identical_payloads() {
    let args = [
        "evaluate", "--n1", "3", "--n2", "1", "--chi2", "1.7", "--eta", "0.6", "--method", "mc", "--trials", "500", "--seed",
        "9",
    ];
    let a = json(&run(&args));
    let b = json(&run(&[&args[..], &["--threads", "2"]].concat()));
    assert_eq!(a["result"]["report"]["mu"], b["result"]["report"]["mu"]);
    assert_eq!(a["result"]["report"]["mc_std_error"], b["result"]["report"]["mc_std_error"]);
}
