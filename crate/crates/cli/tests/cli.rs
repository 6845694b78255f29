use std::process::{Command, Output};

use gpsrh_core::{Complex64, ModelParams, RhSolution};

const CANONICAL: [&str; 14] = [
    "--lambda1", "0.3", "--lambda2", "0.4", "--nu1", "1", "--nu2", "1", "--r", "1", "--phi1", "0.7", "--phi2", "0.6",
];

fn gpsrh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpsrh")).args(args).output().unwrap()
}

fn with_canonical<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&CANONICAL);
    v.extend_from_slice(extra);
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn stability_of_canonical_set() {
    let o = gpsrh(&with_canonical("stability", &[]));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("LHS1 = 0.650000"), "{}", stdout(&o));
    let o = gpsrh(&with_canonical("stability", &["--format", "json"]));
    assert!((json(&o)["stability"]["lhs1"].as_f64().unwrap() - 0.65).abs() < 1e-12);
}

#[test]
fn non_positive_rate_is_an_input_error() {
    let o = gpsrh(&with_canonical("stability", &["--lambda1", "-0.5"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lambda1"));
    let o = gpsrh(&with_canonical("stability", &["--lambda1", "0"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_two() {
    assert_eq!(gpsrh(&with_canonical("solve", &["--eval-p0y", "abc"])).status.code(), Some(2));
    assert_eq!(gpsrh(&["stability", "--lambda1", "0.3"]).status.code(), Some(2));
}

#[test]
fn unstable_set_exits_one() {
    let o = gpsrh(&with_canonical("stability", &["--lambda1", "2"]));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(gpsrh(&with_canonical("solve", &["--lambda1", "2"])).status.code(), Some(1));
}

#[test]
fn solve_matches_library() {
    let o = gpsrh(&with_canonical("solve", &["--format", "json", "--eval-p0y", "0.5"]));
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    for key in ["input", "derived", "stability", "config", "solution", "evaluations", "tail", "oracle", "checks", "warnings"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let p = ModelParams::new(0.3, 0.4, 1.0, 1.0, 1.0, 0.7, 0.6).unwrap();
    let s = RhSolution::new(&p).unwrap();
    assert_eq!(v["solution"]["p00"].as_f64().unwrap(), s.p00());
    let expect = s.p0y(Complex64::new(0.5, 0.0)).unwrap().value;
    assert_eq!(v["evaluations"][0]["value"][0].as_f64().unwrap(), expect.re);
}

#[test]
fn solve_defaults_to_empty_queue_probabilities() {
    let o = gpsrh(&with_canonical("solve", &[]));
    let text = stdout(&o);
    assert!(text.contains("P(0,0) = 0.201601"), "{text}");
    assert!(text.contains("P(1,0)") && text.contains("P(0,1)"));
    assert!(!text.contains("P(0,y) at"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.cfg");
    std::fs::write(&path, "# canonical\nlambda1 = 0.3\nlambda2 = 0.4\nnu1 = 1\nnu2 = 1\nr = 1\nphi1 = 0.7\nphi2 = 0.6\n").unwrap();
    let cfg = path.to_str().unwrap();
    let o = gpsrh(&["stability", "--config", cfg, "--format", "json"]);
    assert_eq!(json(&o)["input"]["lambda2"].as_f64(), Some(0.4));
    let o = gpsrh(&["stability", "--config", cfg, "--lambda2", "0.1", "--format", "json"]);
    assert_eq!(json(&o)["input"]["lambda2"].as_f64(), Some(0.1));
}

#[test]
fn case_d_asymptotics() {
    let args = [
        "asymptotics", "--lambda1", "0.35", "--lambda2", "0.2", "--nu1", "1", "--nu2", "1", "--r", "1", "--phi1",
        "0.45", "--phi2", "0.9", "--tail-range", "1:3",
    ];
    let o = gpsrh(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("case d"), "{text}");
    assert!(text.contains("decay base 0.300000"), "{text}");
    let mut args = args.to_vec();
    args.extend(["--format", "json"]);
    let v = json(&gpsrh(&args));
    assert!((v["tail"]["estimate"]["decay_base"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(v["tail"]["table"].as_array().unwrap().len(), 3);
}

#[test]
fn oracle_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        let o = gpsrh(&with_canonical("oracle", &["--N", "50", "--seed", "7", "--horizon", "2000", "--out", out]));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["stationary.csv", "simulation.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs");
    }
    let grid = std::fs::read_to_string(a.path().join("stationary.csv")).unwrap();
    assert!(grid.starts_with("n1,n2,probability\n"));
}

#[test]
fn oracle_rejects_small_truncation() {
    let o = gpsrh(&with_canonical("oracle", &["--N", "5"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_canonical_set() {
    let o = gpsrh(&with_canonical("validate", &[]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(!text.contains("FAIL"));
}
