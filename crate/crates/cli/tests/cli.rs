use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lensmimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lensmimo")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn default_scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default.toml")
}

#[test]
fn power_table_defaults() {
    let o = lensmimo(&["power-table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let csv = text.split("\n\n").nth(1).unwrap();
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["scheme", "m_rf", "power_w"]);
    let got: Vec<(String, Option<usize>, f64)> = rows.deserialize().map(|r| r.unwrap()).collect();
    let find = |s: &str, m: Option<usize>| got.iter().find(|r| r.0 == s && r.1 == m).unwrap().2;
    assert_eq!(got.len(), 5);
    assert_eq!(find("upa-digital", None), 100.0);
    assert_eq!(find("upa-hybrid", Some(3)), 18.75);
    assert_eq!(find("upa-hybrid", Some(16)), 100.0);
    assert_eq!(find("lens-selection", Some(3)), 2.985);
    assert_eq!(find("lens-selection", Some(16)), 15.92);
}

#[test]
fn power_table_to_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("power.csv");
    let o = lensmimo(&["power-table", "--p-rf", "1", "--m-rf", "2", "--csv", path.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.contains("upa-digital,,400\n"), "{csv}");
    assert!(!stdout(&o).contains("scheme,m_rf"));
}

#[test]
fn power_table_rejects_negative_power() {
    let o = lensmimo(&["power-table", "--p-ps=-0.1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn lens_response_stdout() {
    let o = lensmimo(&["lens-response", "--dir", "0,0", "--dir", "-11.537,30"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dir_index,m_e,m_a,power"));
    assert_eq!(lines.count(), 2 * 179);

    let summary: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["element_count"], 179);
    let first = &summary["directions"][0];
    assert_eq!((first["argmax_m_e"].as_i64(), first["argmax_m_a"].as_i64()), (Some(0), Some(0)));
    assert!((first["argmax_fraction"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn lens_response_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lens");
    let o = lensmimo(&["lens-response", "--dy", "4", "--dz", "4", "--dir", "10,-20", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let csv = fs::read_to_string(out.join("lens_response.csv")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("lens_response.json")).unwrap()).unwrap();
    let n = summary["element_count"].as_u64().unwrap() as usize;
    assert_eq!(csv.lines().count(), n + 1);
}

#[test]
fn lens_response_rejects_bad_direction() {
    for bad in ["10", "a,b", "95,0"] {
        let o = lensmimo(&["lens-response", "--dir", bad]);
        assert!(!o.status.success(), "{bad}");
    }
}

#[test]
fn simulate_rate_small_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = lensmimo(&[
        "simulate-rate",
        "--config",
        default_scenario().to_str().unwrap(),
        "--trials",
        "4",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("4 trials, seed 9"));

    let mut rows = csv::Reader::from_path(out.join("results.csv")).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["scheme", "m_rf", "snr_db", "mean_se", "stderr_se", "power_w"]);
    // 5 schemes over the 7-point default sweep.
    assert_eq!(rows.records().count(), 35);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["num_trials"], 4);
    assert_eq!(json["config"]["master_seed"], 9);
}

#[test]
fn simulate_rate_seed_changes_output() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = tmp.path().join(seed);
        let o = lensmimo(&[
            "simulate-rate",
            "--config",
            default_scenario().to_str().unwrap(),
            "--trials",
            "3",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(out.join("results.csv")).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn simulate_rate_reports_bad_config() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = lensmimo(&["simulate-rate", "--config", tmp.path().join("nope.toml").to_str().unwrap()]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.toml"));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "num_trials = 10\nunknown_key = 1\n").unwrap();
    let o = lensmimo(&["simulate-rate", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());

    let o = lensmimo(&["simulate-rate", "--config", default_scenario().to_str().unwrap(), "--trials", "0"]);
    assert!(!o.status.success());
}
