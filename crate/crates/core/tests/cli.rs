use std::process::{Command, Output};

fn pastvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pastvar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value_line(o: &Output) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("value: "))
        .expect("value line")
        .parse()
        .unwrap()
}

#[test]
fn eval_examples() {
    let o = pastvar(&["eval", "--dist", "family=uniform b=1", "--measure", "past-varentropy", "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_line(&o), 0.0);
    let o = pastvar(&["eval", "--dist", "family=power k=2", "--measure", "past-entropy", "--t", "0.5"]);
    assert!((value_line(&o) - (0.5 + 0.25f64.ln())).abs() < 1e-11);
    let o = pastvar(&["eval", "--dist", "family=exponential lambda=1", "--measure", "reversed-hazard", "--t", "1"]);
    let want = (-1.0f64).exp() / (1.0 - (-1.0f64).exp());
    assert!((value_line(&o) - want).abs() < 1e-11);
    assert!(stdout(&o).contains("method: closed_form"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| pastvar(args).status.code();
    assert_eq!(code(&["eval", "--dist", "family=gamma k=2", "--measure", "entropy"]), Some(2));
    assert_eq!(code(&["eval", "--dist", "uniform b=1", "--measure", "nonsense", "--t", "0.5"]), Some(2));
    assert_eq!(code(&["eval", "--dist", "uniform", "--measure", "past-entropy", "--t", "1.5"]), Some(3));
    assert_eq!(code(&["eval", "--dist", "uniform b=-1", "--measure", "entropy"]), Some(3));
    assert_eq!(
        code(&[
            "--max-subdiv", "1", "--abs-tol", "1e-14", "--rel-tol", "1e-14", "--numerical-only", "eval",
            "--dist", "weibull shape=0.5", "--measure", "past-varentropy", "--t", "3",
        ]),
        Some(4)
    );
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["verify", "--dist", "power k=2"]), Some(0));
}

#[test]
fn errors_are_reported_on_stderr_without_nan() {
    let o = pastvar(&["eval", "--dist", "exponential", "--measure", "past-entropy", "--t", "-1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error: "), "{err}");
    assert!(!err.contains("NaN"));
}

#[test]
fn curve_csv_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = vec![
            "curve", "--dist", "exponential lambda=1", "--measure", "past-entropy,past-varentropy",
            "--t-min", "0.1", "--t-max", "5", "--points", "40", "--numerical-only",
        ];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", path.to_str().unwrap()]);
        assert_eq!(pastvar(&args).status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", &[]);
    let b = run("b.csv", &[]);
    let c = run("c.csv", &["--sequential"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# pastvar "));
    assert_eq!(
        lines.next().unwrap(),
        "t,past-entropy,past-entropy_err,past-entropy_method,past-varentropy,past-varentropy_err,past-varentropy_method"
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 40);
    let h: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    // Monotone increase towards H(X) = 1.
    assert!(h.windows(2).all(|w| w[0] < w[1]));
    assert!(h[39] < 1.0 && h[39] > 0.95);
    assert!(rows.iter().all(|r| r[3] == "quadrature"));
}

#[test]
fn curve_examples() {
    let o = pastvar(&[
        "curve", "--dist", "family=uniform b=1", "--measure", "past-entropy", "--t-min", "0.05", "--t-max",
        "0.95", "--points", "10",
    ]);
    for line in stdout(&o).lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        let t: f64 = cells[0].parse().unwrap();
        let h: f64 = cells[1].parse().unwrap();
        assert!((h - t.ln()).abs() < 1e-12);
    }
    let o = pastvar(&[
        "curve", "--dist", "family=power k=2", "--measure", "past-varentropy", "--t-min", "0.1", "--t-max",
        "0.9", "--points", "9", "--numerical-only",
    ]);
    for line in stdout(&o).lines().skip(2) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 0.25).abs() < 1e-7);
    }
}

#[test]
fn curve_json_parses() {
    let o = pastvar(&[
        "--format", "json", "curve", "--dist", "weibull shape=2", "--measure", "mean-inactivity-time",
        "--measure", "variance-inactivity-time", "--t-min", "0.5", "--t-max", "2", "--points", "4",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["measures"][1], "variance-inactivity-time");
    assert!(v["rows"][0]["mean-inactivity-time"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_examples() {
    let o = pastvar(&["verify", "--dist", "family=uniform b=1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("constant-varentropy")).unwrap();
    assert!(line.contains("yes") && line.contains("v = 0.0"), "{line}");

    let o = pastvar(&["--format", "json", "verify", "--dist", "family=weibull shape=0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let upper = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "log-concave-upper-bound")
        .unwrap();
    assert_eq!(upper["applicable"], false);
    assert!(upper["note"].as_str().unwrap().starts_with("not-applicable (log-concavity failed"));

    for spec in ["power k=2 | prhr a=3", "exponential | linear a=3 b=2", "exponential | reciprocal"] {
        assert_eq!(pastvar(&["verify", "--dist", spec]).status.code(), Some(0), "{spec}");
    }
}

#[test]
fn verify_csv_quotes_notes() {
    let o = pastvar(&["--format", "csv", "verify", "--dist", "exponential", "--only", "generalized"]);
    let text = stdout(&o);
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0][4].contains("fails, H + ln q = c fails"));
}

#[test]
fn mc_is_reproducible_and_reports_metadata() {
    let args = [
        "--mc-samples", "50000", "--seed", "11", "--format", "csv", "mc", "--dist", "exponential",
        "--measure", "past-varentropy", "--t", "1",
    ];
    let a = pastvar(&args);
    let b = pastvar(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("ChaCha8"));
    assert!(text.contains(",11,"));
    let o = pastvar(&["--mc-samples", "10", "mc", "--dist", "exponential", "--measure", "past-entropy", "--t", "1"]);
    assert_eq!(o.status.code(), Some(3));
}
