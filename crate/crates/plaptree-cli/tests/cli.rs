//! End-to-end tests of the binary: worked examples as golden JSON reports,
//! the exit-code contract, and the generate/solve round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plaptree"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name),
    )
    .expect("golden file exists")
}

fn assert_matches_golden(actual: &str, name: &str) {
    let expected = golden(name);
    if actual.trim() != expected.trim() {
        // Write the observed output next to the golden for easy diffing.
        let got = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(format!("{name}.observed"));
        std::fs::write(&got, actual).ok();
        panic!("output differs from golden {name}; observed copy at {}", got.display());
    }
}

#[test]
fn bounds_single_edge_golden() {
    let out = run(&[
        "bounds",
        fixture("single_edge.json").to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    assert_matches_golden(&stdout(&out), "bounds_single_edge.json");
}

#[test]
fn bounds_two_path_golden() {
    let out = run(&[
        "bounds",
        fixture("two_path.json").to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    assert_matches_golden(&stdout(&out), "bounds_two_path.json");
}

#[test]
fn solve_two_path_golden() {
    let out = run(&[
        "solve",
        fixture("two_path.json").to_str().unwrap(),
        "--sequence",
        "--json",
    ]);
    assert!(out.status.success());
    assert_matches_golden(&stdout(&out), "solve_two_path.json");

    // The numbers themselves: lambda = (3 - sqrt 5)/2 and the truncation
    // sequence rows (1, 1/2), (2, lambda).
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let lambda = report["oracle"]["lambda"].as_f64().unwrap();
    let truth = (3.0 - 5f64.sqrt()) / 2.0;
    assert!((lambda - truth).abs() <= 1e-9);
    let rows = report["sequence"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["m"], 1);
    assert!((rows[0]["lambda"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    assert!((rows[1]["lambda"].as_f64().unwrap() - truth).abs() <= 1e-9);
}

#[test]
fn solve_single_edge_is_exact() {
    for p in ["1.5", "2", "3", "4"] {
        let out = run(&[
            "solve",
            fixture("single_edge.json").to_str().unwrap(),
            "--p",
            p,
            "--json",
        ]);
        assert!(out.status.success());
        let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        let lambda = report["oracle"]["lambda"].as_f64().unwrap();
        assert!((lambda - 2.0 / 3.0).abs() <= 1e-12, "p={p}: {lambda}");
    }
}

#[test]
fn generate_round_trips_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let doc_path = dir.path().join("homogeneous.json");
    let out = run(&[
        "generate",
        "--homogeneous",
        "2",
        "2",
        "0.25",
        "1",
        "--out",
        doc_path.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    let gen_report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        gen_report["generated"]["sigma_closed_form"].as_f64().unwrap(),
        1.5
    );

    // Solving the document equals solving the in-memory generated tree,
    // rounding and all.
    let out = run(&["solve", doc_path.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let from_doc = report["oracle"]["lambda"].as_f64().unwrap();

    let tree = plaptree::generate_homogeneous(2, 2, 0.25, 1.0).unwrap();
    let p = plaptree::PExponent::new(2.0).unwrap();
    let pair = plaptree::solver::solve_principal(&tree, p, 1e-10, 10_000).unwrap();
    assert_eq!(from_doc.to_bits(), pair.lambda.to_bits());

    // The embedded sigma annotation matches the direct computation.
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc_path).unwrap()).unwrap();
    assert_eq!(doc["meta"]["sigma"].as_f64().unwrap(), 1.5);
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 4);
}

#[test]
fn generate_rejects_out_of_range_decay() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "generate",
        "--homogeneous",
        "2",
        "3",
        "0.6",
        "1",
        "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("t must lie in (0, 1/r)"));
}

#[test]
fn malformed_input_exits_2_and_names_the_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Validation failures name the offending vertex id.
    std::fs::write(
        &path,
        r#"{"format_version":1,"p":2.0,"vertices":[
            {"id":"o","parent":null,"mu":1.0,"nu":null},
            {"id":"b","parent":"c","mu":1.0,"nu":1.0}]}"#,
    )
    .unwrap();
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("\"b\"") && err.contains("\"c\""), "got: {err}");

    // Wrong format version is an input error too.
    std::fs::write(
        &path,
        r#"{"format_version":7,"p":2.0,"vertices":[]}"#,
    )
    .unwrap();
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites_pass_on_the_examples() {
    for suite in ["identities", "sandwich", "equalities", "lemma21", "lemma31"] {
        let out = run(&[
            "verify",
            fixture("two_path.json").to_str().unwrap(),
            "--suite",
            suite,
        ]);
        assert!(
            out.status.success(),
            "suite {suite} failed:\n{}",
            stdout(&out)
        );
    }
}

#[test]
fn verify_skips_open_questions_below_p2() {
    for suite in ["lemma21", "equalities"] {
        let out = run(&[
            "verify",
            fixture("two_path.json").to_str().unwrap(),
            "--suite",
            suite,
            "--p",
            "1.5",
        ]);
        assert!(out.status.success(), "suite {suite} must exit 0 when skipped");
        assert!(
            stdout(&out).contains("skipped: open for p<2"),
            "suite {suite} must print the skip notice"
        );
    }
}

#[test]
fn bounds_accepts_a_test_function() {
    let dir = tempfile::tempdir().unwrap();
    let tf = dir.path().join("ratios.json");
    // A frozen-ratio function on the 2-path with cutoff 1: the boundary
    // sentinel at the root child, ratio 1 below.
    std::fs::write(
        &tf,
        r#"{"id":"w-cut-1","kind":"ratios","tag":"ratio-plateau","cutoff":1,
           "values":{"v1":"inf","v2":1.0}}"#,
    )
    .unwrap();
    let out = run(&[
        "bounds",
        fixture("two_path.json").to_str().unwrap(),
        "--test-function",
        tf.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // Truncated difference form at the cut: edge weight over subtree mass.
    assert!((report["test_function"]["upper"].as_f64().unwrap() - 0.5).abs() <= 1e-12);

    // An invalid member is rejected with exit 2.
    std::fs::write(
        &tf,
        r#"{"kind":"ratios","tag":"ratio-plateau","cutoff":1,
           "values":{"v1":2.0,"v2":1.0}}"#,
    )
    .unwrap();
    let out = run(&[
        "bounds",
        fixture("two_path.json").to_str().unwrap(),
        "--test-function",
        tf.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
