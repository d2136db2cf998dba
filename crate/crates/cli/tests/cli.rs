//! End-to-end tests of the binary: exit-code contract, report determinism,
//! fixture overrides, and the mutation paths (corrupted fixtures must fail
//! loudly, with the discrepancy machinery engaged).

use std::path::Path;
use std::process::{Command, Output};

use asianlie_core::cases::CATALOG_V1;
use asianlie_core::determining::REFERENCE_SYSTEM_V1;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asianlie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("stdout is a JSON report")
}

fn write_fixture(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("fixture written");
    path.display().to_string()
}

#[test]
fn determining_passes_against_the_embedded_reference() {
    let out = run(&["determining"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("[pass] vanishing patterns agree"));
    assert!(text.contains("[pass] generated equations lie in the reference span"));
    assert!(text.contains("[pass] reference equations lie in the generated span"));
}

#[test]
fn show_monomials_annotates_each_equation() {
    let out = run(&["determining", "--show-monomials"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# coefficient of u_xx"));
}

#[test]
fn a_corrupted_reference_sign_fails_with_the_equation_displayed() {
    let dir = tempfile::tempdir().unwrap();
    let corrupted = REFERENCE_SYSTEM_V1.replace("+ 2*xi1(t,x,y,u)", "- 2*xi1(t,x,y,u)");
    assert_ne!(corrupted, REFERENCE_SYSTEM_V1, "mutation must apply");
    let path = write_fixture(dir.path(), "reference.txt", &corrupted);

    let out = run(&["determining", "--fixtures", &path, "--json"]);
    assert_eq!(out.status.code(), Some(1), "a failing check exits 1");
    let report = json(&out);
    let failing: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(!failing.is_empty());
    // The corrupted equation must be displayed in a discrepancy entry.
    let discrepancies = report["discrepancies"].as_array().unwrap();
    assert!(!discrepancies.is_empty());
    assert!(discrepancies
        .iter()
        .any(|d| d["residual"].as_str().unwrap().contains("xi1")));
}

#[test]
fn classify_reports_are_byte_identical_across_runs() {
    let a = run(&["classify", "--f", "3*x^2+5", "--json"]);
    let b = run(&["classify", "--f", "3*x^2+5", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical inputs must render identical reports");

    let report = json(&a);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "classify");
    assert_eq!(report["inputs"]["f"], "3*x^2+5");
    let algebra = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "admitted algebra")
        .expect("algebra check present");
    assert_eq!(algebra["status"], "pass");
    assert!(algebra["detail"].as_str().unwrap().contains("row 2"));
}

#[test]
fn classify_generic_drift_reports_kernel_only() {
    let out = run(&["classify", "--f", "exp(x)"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("kernel only"));
    assert!(text.contains("[inconclusive] canonicalization"));
}

#[test]
fn classify_rejects_unparseable_drift_with_exit_2() {
    let out = run(&["classify", "--f", "1 +* x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty(), "no report on a usage error");
    assert!(!out.stderr.is_empty());
}

#[test]
fn verify_catalog_passes_and_reports_the_dimension_summary() {
    let out = run(&["verify-catalog", "--json"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let report = json(&out);
    let summary = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "dimension summary")
        .expect("summary present");
    assert_eq!(summary["status"], "pass");
    assert!(summary["detail"].as_str().unwrap().contains("maximum 8 at row 4"));
}

#[test]
fn unknown_row_is_a_usage_error() {
    let out = run(&["verify-catalog", "--row", "99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn an_alien_generator_in_the_catalog_fails_with_a_nearest_ansatz() {
    let dir = tempfile::tempdir().unwrap();
    // Dx is not a symmetry of f = x; row 2 has a covering case ansatz, so
    // the discrepancy must carry the nearest specialization.
    let corrupted = CATALOG_V1.replace(
        "row 2: f = x\ngen Dt",
        "row 2: f = x\ngen Dx\ngen Dt",
    );
    assert_ne!(corrupted, CATALOG_V1, "mutation must apply");
    let path = write_fixture(dir.path(), "catalog.txt", &corrupted);

    let out = run(&["verify-catalog", "--fixtures", &path, "--row", "2", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let discrepancies = report["discrepancies"].as_array().unwrap();
    let entry = discrepancies
        .iter()
        .find(|d| d["check"].as_str().unwrap().contains("Dx"))
        .expect("failing generator has a discrepancy");
    assert!(!entry["residual"].as_str().unwrap().is_empty());
    let nearest = entry["nearest_ansatz"].as_str().expect("nearest ansatz attached");
    assert!(nearest.contains("case (1)"), "{nearest}");
}

#[test]
fn reduce_emits_a_verified_ansatz() {
    let out = run(&["reduce", "--f", "x", "--generator", "2*Dy + 3*u*Du", "--json"]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["checks"][1]["name"], "back-substitution");
    assert_eq!(report["checks"][1]["status"], "pass");
    let ansatz = report["artifacts"]["ansatz"].as_str().unwrap();
    assert!(ansatz.contains("w(t,x)"), "{ansatz}");
}

#[test]
fn reduce_of_a_pure_scaling_is_a_usage_error() {
    let out = run(&["reduce", "--f", "x", "--generator", "u*Du"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no invariant ansatz"), "{err}");
}

#[test]
fn reduce_outside_the_family_is_inconclusive_not_failing() {
    let out = run(&["reduce", "--f", "x", "--generator", "x*Dx - t*Dy", "--json"]);
    assert!(out.status.success(), "inconclusive alone must exit 0");
    let report = json(&out);
    assert_eq!(report["checks"][0]["status"], "inconclusive");
    assert!(report["artifacts"]["characteristic-system"]
        .as_str()
        .unwrap()
        .contains("dx/(x)"));
}

#[test]
fn solve_exports_a_final_time_csv_slice() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slice.csv");
    let out = run(&[
        "solve",
        "--f",
        "x",
        "--size",
        "17",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    assert_eq!(lines.count(), 17 * 17);
}
