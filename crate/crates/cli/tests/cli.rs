use std::path::Path;
use std::process::{Command, Output};

fn hlk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlk")).args(args).output().expect("run hlk")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn list_suites_prints_registry() {
    for args in [&["list-suites"][..], &["suite", "--list-suites"][..]] {
        let o = hlk(args);
        assert_eq!(code(&o), 0);
        for name in ["phisymm", "nkern", "dgh", "morse"] {
            assert!(text(&o).lines().any(|l| l.starts_with(name)), "{name} missing");
        }
    }
}

#[test]
fn unknown_suite_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hlk(&["suite", "--suites", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_config_is_usage_error() {
    assert_eq!(code(&hlk(&["suite", "--n", "1"])), 2);
    assert_eq!(code(&hlk(&["suite", "--domain", "torus"])), 2);
    assert_eq!(code(&hlk(&["suite", "--h", "0"])), 2);
    assert_eq!(code(&hlk(&["frobnicate"])), 2);
}

#[test]
fn passing_suite_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hlk(&["suite", "--domain", "ball", "--n", "3", "--q", "1", "--suites", "phisymm,lphi-ii-z", "--out", out]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = read(&dir.path().join("checks.csv"));
    assert!(csv.starts_with("suite,domain,n,q,seed,check,slope_measured,slope_required,relation,pass,note\n"));
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
    let report: serde_json::Value = serde_json::from_str(&read(&dir.path().join("phisymm.json"))).unwrap();
    assert_eq!(report["suite"], "phisymm");
    assert_eq!(report["thresholds"]["version"], 1);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn failing_check_exits_one() {
    // The normal-approach boundary check fails for the truncated kernel.
    let dir = tempfile::tempdir().unwrap();
    let o = hlk(&["suite", "--suites", "boundary", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", text(&o));
    assert!(text(&o).contains("FAIL boundary/"));
}

#[test]
fn suite_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = hlk(&["suite", "--domain", "pinched", "--n", "3", "--q", "1", "--seed", "5", "--suites", "lphi,morse", "--out", d.path().to_str().unwrap()]);
        assert!(code(&o) <= 1);
    }
    for f in ["checks.csv", "lphi.json", "morse.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"domain": "pinched", "n": 2, "q": 0, "suites": ["morse"]}"#).unwrap();
    let out = dir.path().join("out");
    let o = hlk(&["suite", "--config", cfg.to_str().unwrap(), "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let resolved: serde_json::Value = serde_json::from_str(&read(&out.join("config.json"))).unwrap();
    assert_eq!(resolved["n"], 3);
    assert_eq!(resolved["domain"], "pinched");
    std::fs::write(&cfg, r#"{"dimension": 3}"#).unwrap();
    assert_eq!(code(&hlk(&["suite", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn eval_gamma00_matches_direct_formula() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "# zeta, z\n0.1,0,0.2,0.1,0.3,0,0.2,-0.1\n").unwrap();
    let out = dir.path().join("g.csv");
    let o = hlk(&["eval", "--domain", "ball", "--n", "2", "--kernel", "Gamma00", "--points", pts.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = read(&out);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let re: f64 = row[7].parse().unwrap();
    // (n-2)!/(2 pi^n) rho2^{1-n} with rho2 = 2 |zeta - z|^2 = 0.16.
    let expected = 1.0 / (2.0 * std::f64::consts::PI.powi(2) * 0.16);
    assert!((re - expected).abs() < 1e-12 * expected, "{re} vs {expected}");
    assert_eq!(row[8].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[9], "");
}

#[test]
fn eval_error_rows_and_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "0,0,0,0,0,0,0.05,0,0,0,0,0\n1,2\n").unwrap();
    let o = hlk(&["eval", "--domain", "pinched", "--n", "3", "--q", "1", "--kernel", "Nq", "--points", pts.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = text(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",SingularFramePoint"));
    assert!(lines[2].starts_with("1,") && lines[2].contains("Parse"));
    std::fs::write(&pts, "").unwrap();
    let o = hlk(&["eval", "--n", "3", "--kernel", "Nq", "--points", pts.to_str().unwrap()]);
    assert_eq!(text(&o), "row,zeta,z,holo_zeta,anti_zeta,holo_z,anti_z,re,im,error\n");
}

#[test]
fn eval_unknown_kernel_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "").unwrap();
    assert_eq!(code(&hlk(&["eval", "--kernel", "Zq", "--points", pts.to_str().unwrap()])), 2);
}

#[test]
fn derive_transcripts_match_tables() {
    for (kind, variant, j) in [("mainint", "i", "2"), ("intmain", "N", "3"), ("mainint", "iii", "1"), ("intmain", "dbarN", "2")] {
        let o = hlk(&["derive", kind, variant, j]);
        assert_eq!(code(&o), 0, "{kind} {variant} {j}");
        let t: serde_json::Value = serde_json::from_str(&text(&o)).unwrap();
        assert_eq!(t["match"], true);
        assert_eq!(t["rhs"], t["expected"]);
        assert!(!t["steps"].as_array().unwrap().is_empty());
    }
    assert_eq!(code(&hlk(&["derive", "mainint", "iv", "2"])), 2);
    assert_eq!(code(&hlk(&["derive", "mainint", "i", "0"])), 2);
}

#[test]
fn ratio_table_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["ratio", "--n", "2", "--resolutions", "6,8", "--trials", "2", "--targets", "8", "--seed", "11", "--out", out];
    assert_eq!(code(&hlk(&args)), 0);
    let csv = read(&dir.path().join("ratio.csv"));
    assert!(csv.starts_with("resolution,p,s,a,b,trial,ratio\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("ratio.json"))).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["admissible"], true);
    let again = tempfile::tempdir().unwrap();
    let mut args2 = args;
    args2[args2.len() - 1] = again.path().to_str().unwrap();
    assert_eq!(code(&hlk(&args2)), 0);
    assert_eq!(csv, read(&again.path().join("ratio.csv")));
}
