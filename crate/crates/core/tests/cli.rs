use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cklh"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cklh")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("i4_hyperbolic.json");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x1,y1,x2,y2,x3,y3");
    assert_eq!(lines.len(), 102);
    let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.35, -0.45, -0.25, 0.55, 0.15, -0.7]);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["pass"], true);
    let names: Vec<&str> = m["invariants"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["F2(1,2)", "F2(1,3)", "F2(2,3)", "F3"]);
    assert!(m["invariants"].as_array().unwrap().iter().all(|r| r["drift"].as_f64().unwrap() <= 1e-7));
}

#[test]
fn blow_up_is_flagged_and_the_csv_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("riccati_blowup.json");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--svg"]);
    assert_eq!(o.status.code(), Some(1));
    let m = json(&dir.path().join("manifest.json"));
    let term = &m["trajectories"][0]["termination"];
    assert_eq!(term["status"], "blow_up");
    assert!((term["t"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x1"));
    assert!(csv.lines().last().unwrap().ends_with(','));
    let svg = std::fs::read_to_string(dir.path().join("trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn invalid_state_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        "{\n  \"schema_version\": 1,\n  \"system\": \"class_i4\",\n  \"kappa\": 0,\n  \"initial_states\": [\n    [0.1, 0.4],\n    [0.5, 0.5]\n  ]\n}\n",
    )
    .unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("bad.json:7:"), "{err}");
    assert!(err.contains("diagonal"), "{err}");
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn syntax_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{\n  \"schema_version\": 1,\n  \"system\": \"class_p2\"\n  \"kappas\": [1, 1]\n}\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("broken.json:4:"), "{}", text(&o.stderr));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = run(&["simulate", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn superpose_rebuilds_the_hidden_solution() {
    for name in ["superpose_i4.json", "superpose_p2_flat.json"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = configs().join(name);
        let o = run(&["superpose", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", text(&o.stdout));
        let r = json(&dir.path().join("superposition.json"));
        assert!(r["max_deviation"].as_f64().unwrap() <= 1e-6);
        let csv = std::fs::read_to_string(dir.path().join("superposition.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("t,x,y,x_hidden,y_hidden,deviation"));
    }
}

#[test]
fn superpose_with_given_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("superpose_riccati_mu.json");
    let o = run(&["superpose", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stdout));
    let r = json(&dir.path().join("superposition.json"));
    assert_eq!(r["mu"][0], 0.7);
    assert!(r.get("max_deviation").is_none());
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "identities", "tables", "--samples", "10", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stdout));
    let out = text(&o.stdout);
    assert!(out.contains("PASS suite identities"));
    assert!(out.contains("PASS suite tables"));
    let r = json(&dir.path().join("verify_tables.json"));
    assert_eq!(r["seed"], 3);
    assert_eq!(r["pass"], true);
}

#[test]
fn verify_reports_are_deterministic() {
    let a = run(&["verify", "pushforward", "--json", "--samples", "10"]);
    let b = run(&["verify", "pushforward", "--json", "--samples", "10"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_config_file() {
    let cfg = configs().join("verify_quick.json");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let out = text(&o.stdout);
    assert!(out.contains("seed 7, samples 20"), "{out}");
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn threads_variable_is_validated() {
    let o = bin().args(["verify", "identities"]).env("CKLH_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["verify", "identities", "-q"]).env("CKLH_THREADS", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn table_command() {
    let o = run(&["table", "table2", "--point", "1,2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let o = run(&["table", "table3", "--point", "-0.3,0.7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o.stdout).contains("rows evaluated"));
}

#[test]
fn sweeps_write_csv_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["sweep", "contraction", "--system", "class_i4", "--sign", "minus", "--out", d]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("kappa,X1_x,X1_y,X2_x,X2_y,X3_x,X3_y,h1,h2,h3,W,F2"));
    assert_eq!(csv.lines().count(), 8);
    let o = run(&["sweep", "perturbation", "--target", "ermakov_neg", "--point", "1.1,-0.2", "--out", d]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stdout));
    let r = json(&dir.path().join("sweep.json"));
    for c in r["components"].as_array().unwrap() {
        let s = c["slope"].as_f64().unwrap();
        assert!((1.8..=2.2).contains(&s), "{c}");
    }
}
