use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use urv::io::{read_trace, TraceLine};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn urv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urv"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn refine_near_diagonal_fourteen_sweeps() {
    let input = data("near_diagonal.csv");
    let o = urv(&[
        "refine",
        "--input",
        path_str(&input),
        "--max-iter",
        "14",
        "--tol-h",
        "0",
        "--tol-e",
        "0",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["double_sweeps"], 14);
    assert_eq!(v["half_sweeps"], 28);
    assert_eq!(v["reason"], "MAX_ITER");
    let e = v["final_e"].as_f64().unwrap();
    let sigma_min = 0.999_999_999_999_995;
    assert!((e - sigma_min).abs() / sigma_min <= 1e-10);
}

#[test]
fn refine_human_output_and_default_stop() {
    let input = data("near_diagonal.csv");
    let o = urv(&[
        "refine",
        "--input",
        path_str(&input),
        "--max-iter",
        "14",
        "--tol-h",
        "0",
    ]);
    let out = stdout(&o);
    assert!(out.contains("final e       : 0.999999999999995"), "{out}");
    assert!(out.contains("double sweeps : 14"));
    assert!(out.contains("reason"));
    let o = urv(&["refine", "--input", path_str(&input)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("converged     : true"));
}

#[test]
fn check_counterexample_is_stationary_risk() {
    let o = urv(&["check", "--input", path_str(&data("counterexample.csv"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("verdict            : STATIONARY_RISK"),
        "{out}"
    );
    assert!(out.contains("v_nn               : 0"), "{out}");
    assert!(stderr(&o).contains("not upper triangular"));

    let o = urv(&[
        "check",
        "--input",
        path_str(&data("near_diagonal.csv")),
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "GUARANTEED_COROLLARY");
    assert_eq!(v["rho0"], 10.0);
}

#[test]
fn svd_of_identity() {
    for name in ["identity3.csv", "identity3.mtx"] {
        let o = urv(&["svd", "--input", path_str(&data(name))]);
        assert_eq!(o.status.code(), Some(0));
        assert!(
            stdout(&o).starts_with("sigma: 1.00000000000000, 1.00000000000000, 1.00000000000000\n")
        );
    }
    let o = urv(&[
        "svd",
        "--input",
        path_str(&data("counterexample.csv")),
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let s: Vec<f64> = v["sigma"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((s[0] - (19.0 + 5f64.sqrt()) / 2.0).abs() <= 1e-13);
    assert!(stderr(&o).is_empty());
}

#[test]
fn refine_rejects_non_triangular_input() {
    let o = urv(&["refine", "--input", path_str(&data("counterexample.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("entry (3, 2)"), "{}", stderr(&o));
}

#[test]
fn usage_errors() {
    let o = urv(&["refine", "--input", "x.csv", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(urv(&["transmogrify"]).status.code(), Some(64));
    assert_eq!(urv(&["refine"]).status.code(), Some(1));
    assert_eq!(urv(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_input_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("ragged.csv");
    fs::write(&bad, "1,2,3\n4,5\n6,7,8\n").unwrap();
    let o = urv(&["svd", "--input", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let rect = dir.path().join("rect.csv");
    fs::write(&rect, "1,2,3\n4,5,6\n").unwrap();
    let o = urv(&["check", "--input", path_str(&rect)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("square"));
}

#[test]
fn json_output_is_deterministic() {
    let input = data("near_diagonal.csv");
    let args = ["refine", "--input", path_str(&input), "--rho", "--json"];
    let a = urv(&args);
    let b = urv(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn trace_has_one_line_per_half_sweep_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let input = data("near_diagonal.csv");
    let o = urv(&[
        "refine",
        "--input",
        path_str(&input),
        "--max-iter",
        "5",
        "--tol-h",
        "0",
        "--tol-e",
        "0",
        "--rho",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<TraceLine> = read_trace(&text).unwrap();
    assert_eq!(lines.len(), 11);
    for (l, line) in lines.iter().enumerate() {
        assert_eq!(line.l, l);
        assert!(line.rho.is_some());
        let rec = line.to_record().unwrap();
        assert_eq!(TraceLine::from(&rec), *line);
    }
    assert_eq!(lines[0].e, "1.0000000000000000e1");
    for raw in text.lines() {
        let v: serde_json::Value = serde_json::from_str(raw).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["corner_flipped", "e", "h_norm", "l", "rho"]);
    }
}

#[test]
fn rrurv_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("deficient.csv");
    fs::write(&m, "5,1,0.5\n0,3,0.25\n0,0,1e-12\n").unwrap();
    let o = urv(&[
        "rrurv",
        "--input",
        path_str(&m),
        "--rank-tol",
        "1e-8",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["numerical_rank"], 2);

    let o = urv(&["verify", "--input", path_str(&data("near_diagonal.csv"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("THM2_LIMIT_E               HOLDS"), "{out}");
    assert!(!out.contains("VIOLATED"));
}
