use std::path::PathBuf;
use std::process::{Command, Output};

fn funkball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_funkball"))
        .args(args)
        .env_remove("FUNKBALL_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn value(out: &Output, key: &str) -> String {
    let prefix = format!("{key} = ");
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{}", stdout(out)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("funkball-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn metric_values() {
    let out = funkball(&["metric", "--n", "2", "--a", "1", "--x", "0.5,0", "--y", "1,0", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&out, "F"), "2.0");
    assert_eq!(value(&out, "F(-y)").parse::<f64>().unwrap(), 2.0 / 3.0);

    let out = funkball(&["metric", "--n", "3", "--a", "0", "--x", "0", "--y", "0,0,1"]);
    assert_eq!(value(&out, "F"), "1.0");

    let out = funkball(&["metric", "--a", "0.5", "--reversibility"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&out, "r_F"), "3.0");
}

#[test]
fn metric_oracle_cross_checks() {
    let out = funkball(&[
        "metric", "--n", "3", "--a", "0.7", "--x", "0.2,-0.5,0.6", "--y", "1,2,-1", "--alpha", "-0.4,1,3", "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("verify").count(), 4);
    assert!(!text.contains("MISMATCH"));
}

#[test]
fn metric_validation() {
    let outside = funkball(&["metric", "--n", "2", "--x", "0.8,0.8"]);
    assert_eq!(outside.status.code(), Some(2));
    let wrong_len = funkball(&["metric", "--n", "3", "--x", "0.1,0.2"]);
    assert_eq!(wrong_len.status.code(), Some(2));
    let bad_a = funkball(&["metric", "--a", "1.5", "--reversibility"]);
    assert_eq!(bad_a.status.code(), Some(2));
    let bad_n = funkball(&["metric", "--n", "1"]);
    assert_eq!(bad_n.status.code(), Some(2));
}

#[test]
fn counterexample_verdicts() {
    for n in ["2", "3"] {
        let out = funkball(&["counterexample", "--n", n]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(value(&out, "verdict"), "PASS");
        let limit: f64 = value(&out, "c1_limit").parse().unwrap();
        assert!((limit - std::f64::consts::PI / 12.0).abs() < 1e-15);
        assert!(stdout(&out).starts_with("r_max,c1,c2,ratio\n"));
    }
    let single = funkball(&["counterexample", "--schedule", "0.999"]);
    assert_eq!(single.status.code(), Some(2));
    // too short a range for C1 to reach its limit
    let short = funkball(&["counterexample", "--n", "2", "--schedule", "0.9,0.99"]);
    assert_eq!(short.status.code(), Some(1));
    assert_eq!(value(&short, "verdict"), "FAIL");
}

#[test]
fn norms_report_and_inequalities() {
    let out = funkball(&["norms", "--n", "4", "--a", "0.8", "--height", "-1.5", "--radius", "0.9", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let plus: f64 = value(&out, "w12a").parse().unwrap();
    let minus = funkball(&["norms", "--n", "4", "--a", "0.8", "--height", "-1.5", "--radius", "0.9", "--negate"]);
    let minus: f64 = value(&minus, "w12a").parse().unwrap();
    assert!((plus - minus).abs() > 1e-3 * plus);

    let sym = |neg: bool| {
        let mut args = vec!["norms", "--a", "0", "--radius", "0.6"];
        if neg {
            args.push("--negate");
        }
        value(&funkball(&args), "w12a").parse::<f64>().unwrap()
    };
    assert!((sym(false) - sym(true)).abs() < 1e-12 * sym(false));
}

#[test]
fn solve_below_threshold_and_at_zero() {
    let out = funkball(&["solve", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&out, "classification"), "only-zero");
    let out = funkball(&["solve", "--a", "0.5", "--lambda", "0.5*lstar"]);
    assert_eq!(value(&out, "classification"), "only-zero");
    assert_eq!(value(&out, "certified"), "true");
}

#[test]
fn solve_rejects_the_funk_endpoint() {
    let out = funkball(&["solve", "--a", "1", "--lambda", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not a vector space"), "{err}");
    let scan = funkball(&["scan", "--a", "1"]);
    assert_eq!(scan.status.code(), Some(2));
}

#[test]
fn solve_two_solutions_writes_reports() {
    let dir = scratch("solve");
    let out = funkball(&["solve", "--a", "0.5", "--lambda", "10*ltilde", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(value(&out, "classification"), "two");
    for f in ["config.resolved", "solve.csv", "solve.json", "profile_u1.csv", "profile_u2.csv"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(dir.join("solve.csv")).unwrap();
    assert!(csv.starts_with("lambda,class,solution,energy,residual,norm,iterations\n"));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("solve.json")).unwrap()).unwrap();
    assert_eq!(json["classification"], "two");
    let e1 = json["solutions"][0]["energy"].as_f64().unwrap();
    let e2 = json["solutions"][1]["energy"].as_f64().unwrap();
    assert!(e1 < 0.0 && 0.0 < e2);

    // the resolved config reproduces the run
    let again = scratch("solve-again");
    let out = funkball(&[
        "solve",
        "--config",
        dir.join("config.resolved").to_str().unwrap(),
        "--lambda",
        "10*ltilde",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.join("solve.json")).unwrap(),
        std::fs::read(again.join("solve.json")).unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_dir_all(&again);
}

#[test]
fn scan_regimes_and_determinism() {
    let (d1, d4) = (scratch("scan1"), scratch("scan4"));
    let run = |dir: &PathBuf, workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_funkball"))
            .args(["scan", "--a", "0.5", "--schedule", "0.5*lstar,10*ltilde", "--out", dir.to_str().unwrap()])
            .env("FUNKBALL_WORKERS", workers)
            .output()
            .unwrap()
    };
    let out = run(&d1, "1");
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let classes: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("lambda = "))
        .map(|l| l.rsplit(": ").next().unwrap())
        .collect();
    assert_eq!(classes, ["only-zero", "two"]);
    assert_eq!(run(&d4, "4").status.code(), Some(0));
    for f in ["scan.csv", "scan.json", "profiles/001_u1.csv", "profiles/001_u2.csv"] {
        assert_eq!(std::fs::read(d1.join(f)).unwrap(), std::fs::read(d4.join(f)).unwrap(), "{f}");
    }
    let _ = std::fs::remove_dir_all(&d1);
    let _ = std::fs::remove_dir_all(&d4);
}

#[test]
fn config_file_and_overrides() {
    let dir = scratch("config");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "n = 2\na = 0.5\n[solver]\nelements = 40\n").unwrap();
    let out = funkball(&["metric", "--config", path.to_str().unwrap(), "--reversibility"]);
    assert_eq!(value(&out, "n"), "2");
    assert_eq!(value(&out, "r_F"), "3.0");
    let out = funkball(&["metric", "--config", path.to_str().unwrap(), "--a", "0", "--reversibility"]);
    assert_eq!(value(&out, "r_F"), "1.0");

    std::fs::write(&path, "bogus = 1\n").unwrap();
    assert_eq!(funkball(&["metric", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, "[solver]\ntol = -1\n").unwrap();
    assert_eq!(funkball(&["metric", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(funkball(&["metric", "--set", "solver.elements=x"]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn diag_tables() {
    let out = funkball(&["diag", "--table", "gradient", "--a", "0.5", "--states", "4", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("state,rel_err,kinks\n"));

    let out = funkball(&["diag", "--a", "0", "--points", "13"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.starts_with("t,g,norm_sq,ratio"))
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 13);
    let peak = rows.iter().cloned().fold(0.0, f64::max);
    assert!(rows[0] < 0.01 * peak && rows[12] < 0.1 * peak);
}

#[test]
fn bad_lambda_tokens() {
    assert_eq!(funkball(&["solve", "--lambda", "3*lfoo"]).status.code(), Some(2));
    assert_eq!(funkball(&["solve", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(funkball(&["scan", "--schedule", "1,abc"]).status.code(), Some(2));
}
