use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn irgakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irgakit")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ragged = write(d, "ragged.mat", "1 2\n3\n");
    let garbage = write(d, "garbage.mat", "1 x\n2 3\n");
    let indefinite = write(d, "indef.mat", "1 2\n2 1\n");
    let nonsym = write(d, "nonsym.mat", "2 1\n0 2\n");
    let ns = format!("{}/tests/data/notsquare.mat", env!("CARGO_MANIFEST_DIR"));

    assert_eq!(irgakit(&["irga", "check", &ns]).status.code(), Some(2));
    assert_eq!(irgakit(&["irga", "check", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(irgakit(&["irga", "check", &ragged]).status.code(), Some(3));
    let out = irgakit(&["irga", "check", &garbage]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:3"));
    assert_eq!(irgakit(&["irga", "check", &indefinite]).status.code(), Some(4));
    assert_eq!(irgakit(&["irga", "check", &nonsym]).status.code(), Some(2));
    assert_eq!(irgakit(&["irga", "bogus"]).status.code(), Some(2));
    assert_eq!(irgakit(&["poly", "parse", "-", "--expr", "a + * b"]).status.code(), Some(3));
    assert_eq!(irgakit(&["majorize", "check", "--y", "1,1", "--x", "2,0"]).status.code(), Some(1));
    assert_eq!(irgakit(&["majorize", "check", "--y", "2,0", "--x", "1,1"]).status.code(), Some(0));
    assert_eq!(irgakit(&["sos", "verify", "--cert", "builtin:n3", "--target", "builtin:nope"]).status.code(), Some(2));
}

#[test]
fn report_shape_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json").display().to_string();
    let out = irgakit(&["--out", &out_path, "majorize", "construct", "--y", "3,2,1", "--x", "2,2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "majorize construct");
    assert_eq!(r["outcome"], "pass");
    assert_eq!(r["inputs"]["y"], "3,2,1");
    assert!(r["wall_time_ms"].is_number());
    assert_eq!(r["payload"]["result"], serde_json::json!([2.0, 2.0, 2.0]));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(saved["payload"], r["payload"]);
    assert!(!out.stderr.is_empty());
    let quiet = irgakit(&["--json", "majorize", "check", "--y", "2,0", "--x", "1,1"]);
    assert!(quiet.stderr.is_empty());
}

#[test]
fn deterministic_across_threads() {
    let run = |threads: &str| {
        let out = irgakit(&[
            "--threads", threads, "irga", "search-counterexample", "--n", "5", "--trials", "300", "--seed", "4",
            "--refine-evals", "0",
        ]);
        let mut r = report(&out);
        r["wall_time_ms"] = Value::Null;
        (out.status.code(), r)
    };
    let (c1, a) = run("1");
    let (c2, b) = run("3");
    assert_eq!(c1, Some(1));
    assert_eq!(c1, c2);
    assert_eq!(a, b);
    assert_eq!(a["payload"]["trials_evaluated"], 300);
}

#[test]
fn sos_commands() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("p.poly").display().to_string();
    let out = irgakit(&["sos", "derive", "--n", "3", "--entry", "2,3", "--write", &poly]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["payload"]["terms"], 7);
    let out = irgakit(&["sos", "verify", "--cert", "builtin:n3", "--target", &poly]);
    assert_eq!(out.status.code(), Some(0));
    let out = irgakit(&["sos", "identity-test", "--poly", &poly, "--n", "3", "--entry", "2,3", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let out = irgakit(&["sos", "identity-test", "--poly", &poly, "--n", "3", "--entry", "1,2", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["payload"]["first_disagreement"].is_object());
    assert_eq!(irgakit(&["sos", "derive", "--n", "5"]).status.code(), Some(2));
}

#[test]
fn poly_commands() {
    let out = irgakit(&["poly", "parse", "-", "--expr", "(a - b)^2", "--vars", "ab"]);
    assert_eq!(report(&out)["payload"]["polynomial"], "a^2 - 2 a b + b^2");
    let out = irgakit(&["poly", "eval", "builtin:pn3", "--at", "a=1,b=2,c=3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = irgakit(&["poly", "eval", "builtin:pn3", "--at", "a=1,b=2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spdd_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.mat", "2 1\n1 1\n");
    let id = write(dir.path(), "i.mat", "1 0 0\n0 1 0\n0 0 1\n");
    let out = irgakit(&["spdd", "make", &g, "--spectrum", "3,1", "--mode", "exact"]);
    let r = report(&out);
    assert_eq!(r["payload"]["diagonal"], serde_json::json!(["5", "-1"]));
    assert_eq!(r["payload"]["m"], serde_json::json!([["5", "-4"], ["2", "-1"]]));
    let out = irgakit(&["spdd", "kron", "--a", &g, "--ea", "3,1", "--b", &id, "--eb", "1,2,3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["payload"]["n"], 6);
    let p = dir.path().join("p.mat").display().to_string();
    let out = irgakit(&["spdd", "construct", "--n", "9", "--seed", "1", "--spectrum", "1,2,3,4,5,6,7,8,9", "--write", &p]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["payload"]["plan"], serde_json::json!([4, 2, 3]));
    let out = irgakit(&["spdd", "gauge", &p, "--gauge-mode", "proven"]);
    assert_eq!(out.status.code(), Some(2));
    let out = irgakit(&["irga", "check", &p]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn search_and_birkhoff() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.mat", "2 1\n1 1\n");
    let out = irgakit(&["search", "run", &g, "--e0", "2,2", "--direction", "min-entropy", "--max-iters", "1"]);
    let r = report(&out);
    assert_eq!(r["payload"]["states"][1]["spectrum"], serde_json::json!(["3", "1"]));
    assert_eq!(r["payload"]["termination"], "iter_budget");
    let s = write(dir.path(), "s.mat", "2/3 1/3\n1/3 2/3\n");
    let out = irgakit(&["majorize", "birkhoff", &s]);
    let r = report(&out);
    assert_eq!(r["payload"]["count"], 2);
    assert_eq!(r["payload"]["terms"][0]["permutation"], serde_json::json!([0, 1]));
    let bad = write(dir.path(), "bad.mat", "1 1\n0 1\n");
    assert_eq!(irgakit(&["majorize", "birkhoff", &bad]).status.code(), Some(4));
    let out = irgakit(&["majorize", "entropy", "--v", "3,1", "--s", &s]);
    assert_eq!(out.status.code(), Some(0));
}
