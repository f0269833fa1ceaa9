use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwprogeny"))
        .args(args)
        .env_remove("GWPROGENY_FORMAT")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn certify_near_two_finds_index_45() {
    let v = json(&["certify", "--b", "2000000001/1000000000", "--n-max", "60"]);
    assert_eq!(v["first_negative"], 45);
    assert_eq!(v["config"]["args"]["n_max"], 60);
}

#[test]
fn certify_inside_window_is_structural() {
    let v = json(&["certify", "--b", "3/2"]);
    assert!(v["first_negative"].is_null());
    assert_eq!(v["structural_certificate"], true);
    assert_eq!(v["louis_identity"], true);
}

#[test]
fn certify_csv_has_fixed_columns() {
    let out = run(&["certify", "--b", "5/2", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("b,first_negative,value,elapsed_ms,structural_certificate")
    );
    assert!(lines.next().unwrap().starts_with("5/2,7,"));
}

#[test]
fn format_env_var_selects_csv() {
    let out = Command::new(env!("CARGO_BIN_EXE_gwprogeny"))
        .args(["certify", "--b", "29/10"])
        .env("GWPROGENY_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("b,first_negative"));
}

#[test]
fn grid_rows_follow_the_grid() {
    let v = json(&[
        "certify-grid",
        "--from",
        "2",
        "--to",
        "3",
        "--step",
        "1/2",
        "--n-max",
        "100",
    ]);
    let rows = v["rows"].as_array().unwrap();
    let bs: Vec<_> = rows.iter().map(|r| r["b"].as_str().unwrap()).collect();
    assert_eq!(bs, ["2/1", "5/2", "3/1"]);
    assert!(rows[0]["first_negative"].is_null());
    assert_eq!(rows[1]["first_negative"], 7);
}

#[test]
fn invert_flags_negative_offspring_mass() {
    let v = json(&[
        "progeny",
        "invert",
        "--progeny",
        "sibuya:1/3",
        "--order",
        "8",
    ]);
    assert_eq!(v["nonnegative"], false);
    let n = v["first_negative"].as_u64().unwrap();
    assert_eq!(v["rows"][n as usize]["negative"], true);
}

#[test]
fn invert_of_half_sibuya_is_geometric_half() {
    let v = json(&[
        "progeny",
        "invert",
        "--progeny",
        "sibuya:1/2",
        "--order",
        "6",
    ]);
    assert_eq!(v["nonnegative"], true);
    let coeffs: Vec<_> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["coefficient"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(coeffs[..3], ["1/2", "1/4", "1/8"]);
}

#[test]
fn forward_routes_agree() {
    let v = json(&[
        "progeny",
        "forward",
        "--offspring",
        "geometric:1/3",
        "--order",
        "12",
    ]);
    assert_eq!(v["routes_agree"], true);
    assert_eq!(v["progeny_family"]["family"], "sibuya");
}

#[test]
fn progeny_check_rejects_sibuya_third() {
    let v = json(&[
        "progeny",
        "check",
        "--progeny",
        "sibuya:1/3",
        "--order",
        "20",
    ]);
    assert_eq!(v["valid_to_order"], false);
}

#[test]
fn decimal_input_is_a_usage_error() {
    let out = run(&["certify", "--b", "2.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("5/2"));
}

#[test]
fn unknown_law_is_a_usage_error() {
    let out = run(&[
        "progeny",
        "forward",
        "--offspring",
        "poisson:1",
        "--order",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn supercritical_offspring_is_a_domain_error() {
    let out = run(&[
        "progeny",
        "forward",
        "--offspring",
        "geometric:2/3",
        "--order",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "SupercriticalOffspring");
}

#[test]
fn supercritical_tilt_is_a_domain_error() {
    let out = run(&["tilt", "offspring", "--law", "geometric:1/3", "--r", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tilt_check_residual_vanishes() {
    let v = json(&[
        "tilt",
        "check",
        "--family",
        "geometric",
        "--alpha",
        "1/3",
        "--r",
        "1/2",
    ]);
    assert_eq!(v["residual_zero"], true);
    let v = json(&[
        "tilt",
        "check",
        "--family",
        "sibuya-offspring",
        "--b",
        "3/2",
        "--r",
        "3/4",
        "--order",
        "20",
    ]);
    assert_eq!(v["residual_zero"], true);
}

#[test]
fn missing_family_parameter_is_a_usage_error() {
    let out = run(&["tilt", "check", "--family", "geometric", "--r", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_reproducible_and_close() {
    let args = [
        "simulate",
        "--family",
        "geometric",
        "--alpha",
        "1/3",
        "--replicas",
        "20000",
        "--seed",
        "7",
    ];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["histogram"], b["histogram"]);
    assert_eq!(a["censored"], 0);
    assert!(a["tv_vs_exact"]["tv_distance"].as_f64().unwrap() < 0.02);
    assert_eq!(a["config"]["args"]["gw"]["master_seed"], 7);
}

#[test]
fn simulate_per_replica_file() {
    let dir = std::env::temp_dir().join(format!("gwprogeny-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("replicas.csv");
    let v = json(&[
        "simulate",
        "--family",
        "sibuya-offspring",
        "--b",
        "3/2",
        "--replicas",
        "500",
        "--per-replica",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 501);
    assert_eq!(v["replicas"], 500);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sibuya_pmf_matches_closed_form() {
    let v = json(&["sibuya", "pmf", "--a", "1/2", "--n-max", "3"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[1]["pmf"], "1/2");
    assert_eq!(rows[2]["pmf"], "1/8");
    assert_eq!(rows[3]["pmf"], "1/16");
}

#[test]
fn sibuya_samples_are_seeded() {
    let a = json(&[
        "sibuya", "sample", "--a", "1/2", "--count", "20", "--seed", "3",
    ]);
    let b = json(&[
        "sibuya", "sample", "--a", "1/2", "--count", "20", "--seed", "3",
    ]);
    assert_eq!(a["rows"], b["rows"]);
}

#[test]
fn check_all_subset_reports_each_criterion() {
    let v = json(&["check-all", "--only", "1,2"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(v["all_pass"], true);
}

#[test]
fn check_all_fault_turns_criterion_red() {
    let out = run(&["check-all", "--only", "1", "--fault", "1", "--strict"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], false);
}
