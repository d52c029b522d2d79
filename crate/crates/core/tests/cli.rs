use std::path::Path;

use novikov::cli::run;
use serde_json::{json, Value};

const SHIPPED: &str = include_str!("../data/catalog.json");

fn exec(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("novikov").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn mutated(dir: &Path, edit: impl FnOnce(&mut Value)) -> String {
    let mut doc: Value = serde_json::from_str(SHIPPED).unwrap();
    edit(&mut doc);
    let path = dir.join("catalog.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    path.display().to_string()
}

fn find<'a>(list: &'a mut Value, key: &str, value: &str) -> &'a mut Value {
    list.as_array_mut().unwrap().iter_mut().find(|x| x[key] == value).unwrap()
}

#[test]
fn shipped_catalog_passes() {
    let (code, out, _) = exec(&["verify-catalog"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("0 failures"));
}

#[test]
fn empty_catalog_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "{}").unwrap();
    let (code, out, _) = exec(&["--catalog", path.to_str().unwrap(), "--format", "json", "verify-catalog"]);
    assert_eq!(code, 0);
    let rep: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rep["families"], 0);
    assert_eq!(rep["failures"], json!([]));
}

#[test]
fn isomorphic_product_change_is_caught_by_witnesses() {
    // e3*e3 = e2+e3 is A2 again in the basis (e1, e2, e2+e3), so only the exact witness limits notice.
    let dir = tempfile::tempdir().unwrap();
    let cat = mutated(dir.path(), |doc| {
        find(&mut doc["families"], "name", "A2")["products"] = json!({"33": {"2": "1", "3": "1"}});
    });
    assert_eq!(exec(&["--catalog", &cat, "verify-catalog"]).0, 0);
    let (code, out, _) = exec(&["--catalog", &cat, "verify-degenerations"]);
    assert_eq!(code, 1);
    assert!(out.contains("A6 -> A2 LimitMismatch"), "{out}");
    assert!(out.contains("failing: 8, 61\n"), "{out}");
}

#[test]
fn corrupted_product_is_localized() {
    let dir = tempfile::tempdir().unwrap();
    let cat = mutated(dir.path(), |doc| {
        find(&mut doc["families"], "name", "A2")["products"] = json!({"33": {"3": "1"}, "13": {"2": "1"}});
    });
    let (code, out, _) = exec(&["--catalog", &cat, "verify-catalog"]);
    assert_eq!(code, 1);
    let fails: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{out}");
    assert_eq!(fails[0], "FAIL A2 Novikov: LeftSymmetric fails on (e1, e3, e3)");
    let (code, out, _) = exec(&["--catalog", &cat, "verify-degenerations"]);
    assert_eq!(code, 1);
    assert!(!out.contains("witnesses:"), "audit must stop the run: {out}");
}

#[test]
fn corrupted_witness_reports_limit_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cat = mutated(dir.path(), |doc| {
        find(&mut doc["witnesses"], "id", "1")["matrix"] = json!([["t", "0", "0"], ["0", "t", "0"], ["0", "0", "1"]]);
    });
    let (code, out, _) = exec(&["--catalog", &cat, "--types", "1", "verify-degenerations"]);
    assert_eq!(code, 1);
    assert!(out.lines().any(|l| l.starts_with("#1 ") && l.ends_with("FAIL")), "{out}");
    assert!(out.contains("A4 -> A3 LimitMismatch"), "{out}");
    assert!(out.contains("failing: 1\n"), "{out}");
}

#[test]
fn type_filter_selects_witnesses() {
    let (code, out, _) = exec(&["--types", "4", "--format", "json", "verify-degenerations"]);
    assert_eq!(code, 0);
    let rep: Value = serde_json::from_str(&out).unwrap();
    let ids: Vec<&str> = rep["witnesses"].as_array().unwrap().iter().map(|w| w["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["33"]);
}

#[test]
fn invariants_spot_values() {
    let (code, out, _) = exec(&["invariants", "E4"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("c_{1,1}") && l.ends_with(" 9/5")), "{out}");

    let (_, out, _) = exec(&["--format", "json", "invariants", "A1"]);
    let rep: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rep["der"], 9);
    assert_eq!(rep["square"], 0);
    assert!(rep["traces"].as_object().unwrap().values().all(Value::is_null));

    let (_, out, _) = exec(&["--format", "json", "invariants", "C7", "g=-1"]);
    let rep: Value = serde_json::from_str(&out).unwrap();
    let d = rep["generalized_derivations"].as_array().unwrap();
    let w110 = d.iter().find(|x| x["weights"] == json!(["1", "1", "0"])).unwrap();
    assert_eq!(w110["dim"], 5);
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(exec(&["invariants", "C7", "g=0"]).0, 2);
    assert_eq!(exec(&["invariants", "C7"]).0, 2);
    assert_eq!(exec(&["invariants", "Z9"]).0, 2);
    assert_eq!(exec(&["invariants", "A1", "x=1"]).0, 2);
    assert_eq!(exec(&["--types", "0", "verify-degenerations"]).0, 2);
    assert_eq!(exec(&["--catalog", "/nonexistent/catalog.json", "verify-catalog"]).0, 2);
    assert_eq!(exec(&["--jobs", "0", "verify-catalog"]).0, 2);
}

#[test]
fn sample_override_changes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.json");
    std::fs::write(&path, r#"{"params": {"C7.g": ["2"]}, "pools": {"generic": ["1", "2"]}}"#).unwrap();
    let (code, out, _) = exec(&["--samples", path.to_str().unwrap(), "--format", "json", "verify-catalog"]);
    assert_eq!(code, 0);
    let full: Value = serde_json::from_str(&exec(&["--format", "json", "verify-catalog"]).1).unwrap();
    let small: Value = serde_json::from_str(&out).unwrap();
    assert!(small["samples"].as_u64() < full["samples"].as_u64());

    std::fs::write(&path, r#"{"params": {"C7.x": ["2"]}}"#).unwrap();
    assert_eq!(exec(&["--samples", path.to_str().unwrap(), "verify-catalog"]).0, 2);
}

#[test]
fn hasse_writes_all_diagrams_deterministically() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (code, out, _) = exec(&["--out", a.path().to_str().unwrap(), "--jobs", "2", "hasse"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(exec(&["--out", b.path().to_str().unwrap(), "hasse"]).0, 0);
    for n in 1..=13 {
        let name = format!("type_{n}.dot");
        let x = std::fs::read_to_string(a.path().join(&name)).unwrap();
        assert_eq!(x, std::fs::read_to_string(b.path().join(&name)).unwrap(), "{name}");
        assert!(x.starts_with(&format!("digraph type_{n} {{")));
    }
    let rep = |d: &Path| std::fs::read_to_string(d.join("hasse_report.json")).unwrap();
    assert_eq!(rep(a.path()), rep(b.path()));
}

#[test]
fn hasse_flags_corrupted_table() {
    let dir = tempfile::tempdir().unwrap();
    let cat = mutated(dir.path(), |doc| {
        let rows = &mut doc["closure_tables"][0]["rows"];
        find_row(rows, "A2")["targets"].as_array_mut().unwrap().retain(|t| t["family"] != "A5");
    });
    let out_dir = dir.path().join("out");
    let (code, out, _) = exec(&["--catalog", &cat, "--types", "1", "--out", out_dir.to_str().unwrap(), "hasse"]);
    assert_eq!(code, 1);
    let disc: Vec<&str> = out.lines().filter(|l| l.contains("DISCREPANCY")).collect();
    assert_eq!(disc, ["  DISCREPANCY A2 -> A5: in closure, not in table"]);
    assert!(out_dir.join("type_1.dot").exists());
    assert!(!out_dir.join("type_2.dot").exists());
}

fn find_row<'a>(rows: &'a mut Value, family: &str) -> &'a mut Value {
    rows.as_array_mut().unwrap().iter_mut().find(|r| r["source"]["family"] == family).unwrap()
}
