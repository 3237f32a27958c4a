use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shardprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shardprice"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = shardprice(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Csv {
    header: Value,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
        let columns = lines.next().unwrap().split(',').map(str::to_owned).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
        Self { header, columns, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("{name}"));
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

fn code(args: &[&str]) -> i32 {
    shardprice(args).status.code().unwrap()
}

#[test]
fn cdf_columns_are_monotone_and_saturate() {
    let csv = Csv::parse(&stdout(&["cdf", "--grid", "0:4:81"]));
    assert_eq!(csv.columns, ["tau", "F_unsharded", "F_uncoded", "F_fixed_rate", "F_rateless"]);
    for name in &csv.columns[1..] {
        let col = csv.column(name);
        assert!(col.windows(2).all(|w| w[1] >= w[0]), "{name}");
        assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
        if name != "F_unsharded" && name != "F_uncoded" {
            assert!(*col.last().unwrap() > 0.99, "{name}");
        }
    }
    let ratios = &csv.header["summary"]["service_level"]["ratios"];
    let r1 = ratios["unsharded_over_rateless"].as_f64().unwrap();
    let r2 = ratios["unsharded_over_fixed_rate"].as_f64().unwrap();
    assert!((2.0..=2.4).contains(&r1) && (1.6..=1.8).contains(&r2));
}

#[test]
fn cdf_adds_turbo_columns_for_positive_fast_rate() {
    let csv = Csv::parse(&stdout(&["cdf", "--grid", "0:2:11", "--lambda2", "8"]));
    assert_eq!(csv.columns.len(), 9);
    let base = csv.column("F_uncoded");
    let turbo = csv.column("F_turbo_uncoded");
    assert!(base.iter().zip(&turbo).all(|(b, t)| t >= b));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["cdf", "--grid", "0:3:31"],
        vec!["race", "--format", "json"],
        vec!["validate", "--trials", "500", "--rank-trials", "200", "--seed", "9"],
    ] {
        let mut files = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("run{i}"));
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            let out = shardprice(&full);
            assert!(out.status.success(), "{full:?}");
            files.push(fs::read(&path).unwrap());
        }
        assert_eq!(files[0], files[1], "{args:?}");
    }
}

#[test]
fn json_output_mirrors_csv_schema() {
    let csv = Csv::parse(&stdout(&["multideadline", "--grid", "0:2:3"]));
    let json: Value =
        serde_json::from_str(&stdout(&["multideadline", "--grid", "0:2:3", "--format", "json"]))
            .unwrap();
    assert_eq!(json["header"]["schema"], 1);
    assert_eq!(csv.header["schema"], 1);
    assert_eq!(json["columns"], serde_json::to_value(&csv.columns).unwrap());
    let mut h = json["header"].clone();
    h["config"]["format"] = "csv".into();
    assert_eq!(h, csv.header);
    for (row, csv_row) in json["rows"].as_array().unwrap().iter().zip(&csv.rows) {
        for (v, s) in row.as_array().unwrap().iter().zip(csv_row) {
            assert_eq!(v.as_f64().unwrap(), s.parse::<f64>().unwrap());
        }
    }
}

#[test]
fn turbo_price_skips_zero_rate_and_orders_variants() {
    let csv = Csv::parse(&stdout(&["turbo-price", "--grid", "0:32:33"]));
    let rates = csv.column("lambda2");
    assert_eq!(rates.len(), 32);
    assert_eq!(rates[0], 1.0);
    let unsharded = csv.column("price_unsharded");
    let uncoded = csv.column("price_uncoded");
    for s in ["uncoded", "fixed_rate", "rateless"] {
        let p = csv.column(&format!("price_{s}"));
        for (i, _) in rates.iter().enumerate().filter(|(_, &l)| l < 8.0) {
            assert!(unsharded[i] < p[i], "{s} at lambda2 = {}", rates[i]);
        }
    }
    let last = rates.len() - 1;
    for s in ["unsharded", "fixed_rate", "rateless"] {
        assert!(uncoded[last] >= csv.column(&format!("price_{s}"))[last]);
    }
    for name in &csv.columns[1..] {
        assert!(csv.column(name).iter().all(|&v| v >= -1e-12), "{name}");
    }
    let share = csv.header["summary"]["optimum"]["fixed_rate"]["revenue_share"].as_f64().unwrap();
    assert!(share >= 0.90);
}

#[test]
fn multideadline_zero_rate_is_the_base_utility() {
    let csv = Csv::parse(&stdout(&["multideadline", "--grid", "0:4:5"]));
    let rateless = csv.column("EU_rateless");
    assert!(rateless.windows(2).all(|w| w[1] > w[0]));
    // Standalone rateless base lane with the same schedule, via a single-rate sweep.
    let alone = Csv::parse(&stdout(&["multideadline", "--grid", "0:0:1"]));
    assert_eq!(alone.column("EU_rateless")[0], rateless[0]);
    for s in ["uncoded", "fixed_rate", "rateless"] {
        let eu = csv.column(&format!("EU_{s}"));
        assert!(eu[1] > eu[0], "{s}");
    }
}

#[test]
fn race_fast_lane_dominates() {
    let csv = Csv::parse(&stdout(&["race"]));
    let fast = csv.column("EU_fast");
    let base = csv.column("EU_base");
    assert_eq!(fast.len(), 21);
    assert!(fast.iter().zip(&base).all(|(f, b)| f >= b));
    assert!(fast[0] > 0.9);
    assert!(*base.last().unwrap() < 0.0);
    assert_eq!(csv.header["summary"]["base_negative_from_alpha"], 0.05);
}

#[test]
fn validate_guards_small_samples() {
    let csv = Csv::parse(&stdout(&["validate", "--trials", "10", "--rank-trials", "100"]));
    let status: Vec<&str> = csv.rows.iter().map(|r| r[1].as_str()).collect();
    assert!(csv.rows.iter().filter(|r| r[0].starts_with("ks_")).all(|r| r[1] == "inconclusive"));
    assert!(!status.contains(&"fail"));
    assert_eq!(csv.header["summary"]["first_failure"], Value::Null);
}

#[test]
fn validate_failure_exits_with_two_and_names_the_check() {
    let out = shardprice(&["validate", "--k", "4", "--n", "8", "--trials", "2000", "--rank-trials", "200"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ratio_unsharded_rateless"), "{err}");
    let csv = Csv::parse(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(csv.header["summary"]["first_failure"], "ratio_unsharded_rateless");
}

#[test]
fn parameter_errors_exit_with_one() {
    assert_eq!(code(&["cdf", "--k", "0"]), 1);
    assert_eq!(code(&["cdf", "--k", "65", "--n", "64"]), 1);
    assert_eq!(code(&["cdf", "--grid", "3:1:5"]), 1);
    assert_eq!(code(&["cdf", "--grid", "-1:1:5"]), 1);
    assert_eq!(code(&["race", "--s", "21"]), 1);
    assert_eq!(code(&["race", "--grid", "0:2:3"]), 1);
    assert_eq!(code(&["turbo-price", "--grid", "0:40:5"]), 1);
    assert_eq!(code(&["turbo-price", "--grid", "0:0:1"]), 1);
    assert_eq!(code(&["price", "--format", "xml"]), 1);
    assert_eq!(code(&["nonsense"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn io_errors_exit_with_three() {
    assert_eq!(code(&["cdf", "--out", "/nonexistent-dir/out.csv"]), 3);
    assert_eq!(code(&["replay", "/nonexistent-dir/out.csv"]), 3);
}

fn replay_reproduces(args: &[&str], dir: &Path) {
    let first = dir.join("first");
    let second = dir.join("second");
    let mut full = args.to_vec();
    full.extend(["--out", first.to_str().unwrap()]);
    assert!(shardprice(&full).status.success());
    let out = shardprice(&["replay", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap(), "{args:?}");
}

#[test]
fn replay_round_trips_the_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    replay_reproduces(&["turbo-price", "--lambda1", "24", "--tau", "0.8", "--grid", "0:8:9"], dir.path());
    replay_reproduces(&["race", "--N", "12", "--s", "4", "--gas", "0", "--format", "json"], dir.path());
    replay_reproduces(&["validate", "--trials", "300", "--rank-trials", "50", "--seed", "3"], dir.path());
}

#[test]
fn replay_flags_override_the_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    assert!(shardprice(&["cdf", "--grid", "0:1:3", "--out", first.to_str().unwrap()]).status.success());
    let csv = Csv::parse(&stdout(&["replay", first.to_str().unwrap(), "--k", "16"]));
    assert_eq!(csv.header["config"]["k"], 16);
    assert_eq!(csv.header["config"]["grid"]["points"], 3);
    fs::write(&first, "tau,F\n0,0\n").unwrap();
    assert_eq!(code(&["replay", first.to_str().unwrap()]), 1);
}
