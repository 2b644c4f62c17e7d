use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TWO_SITE: &str = r#"{
  "sites": [
    {"epsilon_ghz": 0.0, "modes": [{"omega_ghz": 1.0, "huang_rhys": 0.04}]},
    {"epsilon_ghz": 0.1, "modes": [{"omega_ghz": 1.2, "huang_rhys": 0.02}]}
  ],
  "couplings": [{"i": 1, "j": 2, "J_ghz": 0.5}]
}"#;

fn polaron(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polaron"))
        .current_dir(dir)
        .env_remove("POLARON_DIM_CAP")
        .args(args)
        .output()
        .unwrap()
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad stdout {e}: {} / {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("two_site.json"), TWO_SITE).unwrap();
    dir
}

#[test]
fn simulate_rows_are_normalized() {
    let dir = setup();
    let out = polaron(dir.path(), &["simulate", "--model", "two_site.json", "--t-max", "2", "--dt", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s["n_times"], 201);
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_ns,p_site_1,p_site_2"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] + v[2] - 1.0).abs() < 1e-10, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 201);
}

#[test]
fn outputs_are_deterministic() {
    let dir = setup();
    let args = [
        "simulate", "--model", "two_site.json", "--t-max", "1", "--dt", "0.05", "--temperature", "0.05", "--samples",
        "6", "--seed", "42",
    ];
    let mut a = args.to_vec();
    a.extend(["--out", "a.csv"]);
    let mut b = args.to_vec();
    b.extend(["--out", "b.csv"]);
    assert_eq!(polaron(dir.path(), &a).status.code(), Some(0));
    assert_eq!(polaron(dir.path(), &b).status.code(), Some(0));
    let x = std::fs::read(dir.path().join("a.csv")).unwrap();
    let y = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(x, y);
    let mut c = args.to_vec();
    let last = c.len() - 1;
    c[last] = "43";
    c.extend(["--out", "c.csv"]);
    polaron(dir.path(), &c);
    assert_ne!(x, std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn compile_output_feeds_feasibility_and_simulate() {
    let dir = setup();
    assert_eq!(polaron(dir.path(), &["compile", "--model", "two_site.json"]).status.code(), Some(0));
    let f = polaron(dir.path(), &["feasibility", "--design", "design.json"]);
    assert_eq!(f.status.code(), Some(0));
    assert_eq!(summary(&f)["pass"], true);
    let base = ["--t-max", "1", "--dt", "0.1"];
    let mut m = vec!["simulate", "--model", "two_site.json", "--out", "m.csv"];
    m.extend(base);
    let mut d = vec!["simulate", "--design", "design.json", "--out", "d.csv"];
    d.extend(base);
    assert_eq!(polaron(dir.path(), &m).status.code(), Some(0));
    assert_eq!(polaron(dir.path(), &d).status.code(), Some(0));
    let read = |n: &str| -> Vec<f64> {
        std::fs::read_to_string(dir.path().join(n))
            .unwrap()
            .lines()
            .skip(1)
            .flat_map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect()
    };
    for (x, y) in read("m.csv").iter().zip(read("d.csv")) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn compile_with_chains() {
    let dir = setup();
    let out = polaron(dir.path(), &["compile", "--model", "two_site.json", "--chains", "1", "--out", "chain_design.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(&out)["oscillators"], 2);
}

#[test]
fn feasibility_reports_g_range() {
    let dir = setup();
    std::fs::write(dir.path().join("strong.json"), TWO_SITE.replace("0.5}", "1.2}")).unwrap();
    polaron(dir.path(), &["compile", "--model", "strong.json", "--out", "strong_design.json"]);
    let out = polaron(dir.path(), &["feasibility", "--design", "strong_design.json"]);
    assert_eq!(out.status.code(), Some(3));
    let s = summary(&out);
    assert_eq!(s["pass"], false);
    assert_eq!(s["failed"][0]["check"], "g range");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("feasibility.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn transform_253_modes_into_six_chains() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("wavenumber_cm1,value_cm1\n");
    for k in 0..253 {
        let nu = 30.0 + 6.5 * k as f64;
        csv.push_str(&format!("{nu},{}\n", 1.0 + (nu / 400.0).sin().abs()));
    }
    std::fs::write(dir.path().join("modes.csv"), csv).unwrap();
    let out = polaron(
        dir.path(),
        &[
            "transform", "--modes", "modes.csv", "--chains", "6", "--source-temperature", "300",
            "--target-temperature", "0.01", "--thermal", "0.01",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&out);
    assert_eq!(s["max_chain_length"], 43);
    assert_eq!(s["n_chains"], 6);
    let bath: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("chains.json")).unwrap()).unwrap();
    let chains = bath["chains"].as_array().unwrap();
    assert_eq!(chains.len(), 6);
    for c in chains {
        let n = c["omegas_ghz"].as_array().unwrap().len();
        assert_eq!(c["links_ghz"].as_array().unwrap().len(), n - 1);
        assert!(c["head_ghz"].as_f64().unwrap() > 0.0);
    }
    let thermal = std::fs::read_to_string(dir.path().join("thermal.csv")).unwrap();
    assert_eq!(thermal.lines().count(), 1 + 2 * 253);
}

#[test]
fn estimate_writes_frontier() {
    let dir = tempfile::tempdir().unwrap();
    let out = polaron(dir.path(), &["estimate", "--budget-gb", "250", "--max-sites", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("frontier.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_sites,max_peaks,memory_bytes"));
    let peaks: Vec<usize> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(peaks.len(), 30);
    assert!(peaks.windows(2).all(|w| w[1] <= w[0]));
    assert!(peaks[23] >= 1);
}

#[test]
fn spectrum_command() {
    let dir = setup();
    let out = polaron(dir.path(), &["spectrum", "--model", "two_site.json", "--d", "6", "--n-freq", "501"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out);
    assert!((s["area"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    let text = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.starts_with("omega_ghz,intensity\n"));
    assert_eq!(text.lines().count(), 502);
}

#[test]
fn validation_errors_exit_two() {
    let dir = setup();
    assert_eq!(polaron(dir.path(), &["simulate", "--model", "two_site.json", "--bogus"]).status.code(), Some(2));
    assert_eq!(polaron(dir.path(), &["frobnicate"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), r#"{"sites":[{}],"couplings":[{"i":1,"j":3,"J_ghz":1}]}"#).unwrap();
    let out = polaron(dir.path(), &["simulate", "--model", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
    assert_eq!(polaron(dir.path(), &["simulate", "--model", "two_site.json", "--dt", "-1"]).status.code(), Some(2));
    assert_eq!(polaron(dir.path(), &["transform", "--modes", "two_site.json"]).status.code(), Some(2));
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn dimension_cap_from_environment() {
    let dir = setup();
    let out = Command::new(env!("CARGO_BIN_EXE_polaron"))
        .current_dir(dir.path())
        .env("POLARON_DIM_CAP", "50")
        .args(["simulate", "--model", "two_site.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = Command::new(env!("CARGO_BIN_EXE_polaron"))
        .current_dir(dir.path())
        .env("POLARON_DIM_CAP", "lots")
        .args(["simulate", "--model", "two_site.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_is_honoured() {
    let dir = setup();
    let out = polaron(
        dir.path(),
        &["--out-dir", "results", "simulate", "--model", "two_site.json", "--t-max", "0.5", "--dt", "0.1"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("results/trajectory.csv").exists());
}
