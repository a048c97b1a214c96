use std::path::Path;
use std::process::{Command, Output};

use potts_core::numeric::parse_rational;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_potts-verify"));
    c.env_remove("POTTS_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)));
    (code(&o), v)
}

fn verdicts(v: &Value) -> Vec<(String, String)> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["id"].as_str().unwrap().to_string(), c["verdict"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn condition_range_holds() {
    let (c, v) = json_report(&["condition", "--q", "3", "--d", "3", "--alpha-range", "1:53/27"]);
    assert_eq!(c, 0);
    assert_eq!(v["schemaVersion"], 1);
    assert!(v["toolVersion"].is_string());
    assert_eq!(v["configEcho"]["alphaRange"], "1:53/27");
    assert_eq!(verdicts(&v), vec![("condition/q3-d3/range-1:53/27".into(), "holds".into())]);
}

#[test]
fn condition_point_reports_margin() {
    let (c, v) = json_report(&["condition", "--d", "2", "--alpha", "5"]);
    assert_eq!(c, 0);
    assert_eq!(v["checks"][0]["detail"]["margin"]["exact"], "1");
}

#[test]
fn located_violation_exits_one() {
    let (c, v) = json_report(&["condition", "--d", "2", "--alpha", "3/2", "--locate"]);
    assert_eq!(c, 1);
    let f = &v["checks"][1]["detail"]["failsAt"];
    assert!(f["decimal"].as_f64().unwrap() > 53.0 / 27.0);
    assert_eq!(v["checks"][0]["verdict"], "holds");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["condition", "--q", "3", "--d", "3", "--alpha", "1"])), 64);
    assert_eq!(code(&run(&["condition", "--d", "3"])), 64);
    assert_eq!(code(&run(&["sequences", "--d", "3", "--beta", "2"])), 64);
    assert_eq!(code(&run(&["nonsense"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn critical_sequences_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("seq.csv");
    let out = dir.path().join("report.json");
    let o = run(&[
        "sequences", "--d-range", "3:22", "--beta", "critical", "--n", "60", "--round", "10000",
        "--csv", csv.to_str().unwrap(), "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let mut r = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["d", "n", "u_lo", "u_hi", "l_lo", "l_hi", "ratio"]);
    assert_eq!(r.records().count(), 20 * 61);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["tally"]["holds"], 20);
}

#[test]
fn zero_terms_is_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("seq.csv");
    let o = run(&["sequences", "--d", "5", "--beta", "1/2", "--n", "0", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows: Vec<_> = csv::Reader::from_path(&csv).unwrap().records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].iter().collect::<Vec<_>>(), ["5", "0", "1", "1", "0", "0", ""]);
}

fn read_rows(p: &Path) -> Vec<Vec<String>> {
    csv::Reader::from_path(p).unwrap().records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn exact_sequence_is_dominated_by_rounded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("exact.csv"), dir.path().join("rounded.csv"));
    // At n = 20 the ratio is still above the default 53/27 bound.
    let base = ["sequences", "--d", "4", "--beta", "critical", "--n", "20", "--ratio-bound", "3"];
    let mut exact = base.to_vec();
    exact.extend(["--mode", "exact", "--csv", a.to_str().unwrap()]);
    let mut rounded = base.to_vec();
    rounded.extend(["--csv", b.to_str().unwrap()]);
    assert_eq!(code(&run(&exact)), 0);
    assert_eq!(code(&run(&rounded)), 0);
    let q = |s: &str| parse_rational(s).unwrap();
    for (e, r) in read_rows(&a).iter().zip(read_rows(&b)) {
        assert!(q(&r[3]) >= q(&e[3]) && q(&r[4]) <= q(&e[4]), "n = {}", e[1]);
    }
}

#[test]
fn fixed_point_iteration_examples() {
    let (c, v) = json_report(&["fixedpoint", "--d", "2", "--beta", "1/2", "--iterate"]);
    assert_eq!(c, 0);
    let claims = v["checks"][0]["detail"]["claims"].as_array().unwrap();
    assert!(claims.iter().any(|c| c["claim"] == "bracket" && c["holds"] == true));
    let (c, v) = json_report(&["fixedpoint", "--d", "23", "--beta", "critical", "--iterate"]);
    assert_eq!(c, 0);
    assert!(v["checks"][0]["detail"]["ratio"]["decimal"].as_f64().unwrap() < 157.0 / 80.0);
}

#[test]
fn gamma_table() {
    let (c, v) = json_report(&["gamma", "--q", "3", "--d", "2", "--beta", "1/2", "--n-max", "3"]);
    assert_eq!(c, 0);
    assert_eq!(v["checks"][0]["detail"]["gamma"]["exact"], "4");
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn gamma_at_zero_beta_is_unknown() {
    let (c, _) = json_report(&["gamma", "--beta", "0", "--n-max", "1"]);
    assert_eq!(c, 2);
}

#[test]
fn spotcheck_all_passes() {
    let (c, v) = json_report(&["spotcheck", "--all"]);
    assert_eq!(c, 0);
    assert!(v["tally"]["holds"].as_u64().unwrap() >= 15 * 5);
    assert_eq!(code(&run(&["spotcheck", "--id", "no-such-identity"])), 64);
}

#[test]
fn phistar_is_identical_across_worker_counts() {
    let args = ["phistar", "--d-range", "2:6", "--alpha-range", "1:53/27"];
    let one = bin().env("POTTS_WORKERS", "1").args(["--format", "json"]).args(args).output().unwrap();
    let three = bin().env("POTTS_WORKERS", "3").args(["--format", "json"]).args(args).output().unwrap();
    assert_eq!(code(&one), 0);
    let (a, b): (Value, Value) = (serde_json::from_slice(&one.stdout).unwrap(), serde_json::from_slice(&three.stdout).unwrap());
    assert_eq!(a["workers"], 1);
    assert_eq!(b["workers"], 3);
    assert_eq!(a["checks"], b["checks"]);
    assert_eq!(a["checks"].as_array().unwrap().len(), 3 + 4 + 5 + 6 + 7);
}

#[test]
fn checkpoint_resumes_and_rejects_other_configs() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck");
    let args = ["--checkpoint", ck.to_str().unwrap(), "phistar", "--d-range", "2:4"];
    let (c1, first) = json_report(&args);
    let (c2, second) = json_report(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(first["resumed"], 0);
    assert_eq!(second["resumed"], 12);
    assert_eq!(first["checks"], second["checks"]);
    // Drop one sub-task; only it is recomputed.
    std::fs::remove_file(ck.join("phistar_d3-d0-1.json")).unwrap();
    let (_, third) = json_report(&args);
    assert_eq!(third["resumed"], 11);
    assert_eq!(third["checks"], first["checks"]);
    let other = ["--checkpoint", ck.to_str().unwrap(), "phistar", "--d-range", "2:5"];
    assert_eq!(code(&run(&other)), 64);
}

#[test]
fn quick_report_reproduces_every_claim() {
    let (c, v) = json_report(&["report", "--quick"]);
    assert_eq!(c, 0, "{}", serde_json::to_string_pretty(&v["claims"]).unwrap());
    let claims = v["claims"].as_array().unwrap();
    assert_eq!(claims.len(), 9);
    assert!(claims.iter().all(|c| c["verdict"] == "holds"));
    // The located (3,2) violation is reported as a failing check.
    assert!(verdicts(&v).iter().any(|(id, s)| id == "condition/q3-d2/locate" && s == "fails"));
}
