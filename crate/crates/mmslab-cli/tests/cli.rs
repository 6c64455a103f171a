use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmslab"))
        .args(args)
        .env_remove("MMSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let p = path(dir, name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &p]);
    let out = mmslab(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

/// Every float must be the value or tolerance of a quantity; integers are indices or counts.
fn assert_floats_are_quantities(v: &Value, inside_quantity: bool, at: &str) {
    match v {
        Value::Number(n) if n.is_f64() => assert!(inside_quantity, "bare number {n} at {at}"),
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                assert_floats_are_quantities(x, inside_quantity, &format!("{at}/{i}"));
            }
        }
        Value::Object(map) => {
            let quantity = map.contains_key("provenance") && map.contains_key("tolerance");
            for (k, x) in map {
                assert_floats_are_quantities(x, quantity, &format!("{at}/{k}"));
            }
        }
        _ => {}
    }
}

#[test]
fn gen_dyadic_space_has_512_points() {
    let out = mmslab(&["gen", "--kind", "S", "--m", "-4", "--n", "4"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["n"], 512);
    assert_eq!(v["dist"].as_array().unwrap().len(), 512);
    assert_eq!(v["weight"][0], 1.0 / 16.0);
}

#[test]
fn malformed_json_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"n\": 2, \"dist\": [[0, 1], [1, 0]").unwrap();
    let out = mmslab(&["classify", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = json(&out.stderr);
    assert_eq!(err["error"], "parse");
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn schema_violations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "space.json");
    std::fs::write(&p, r#"{"n": 2, "dist": [[0, 1], [1, 0]], "weight": [1, 1], "colour": "red"}"#).unwrap();
    let out = mmslab(&["probe", "uniformity", "--input", &p]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out.stderr)["error"], "schema");

    // Well-formed but not a metric.
    std::fs::write(&p, r#"{"n": 3, "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "weight": [1, 1, 1]}"#).unwrap();
    let out = mmslab(&["probe", "uniformity", "--input", &p]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn size_guard_exits_with_two() {
    let out = mmslab(&["gen", "--kind", "S", "--m", "-10", "--n", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"], "size-guard");

    let dir = tempfile::tempdir().unwrap();
    let s = gen(dir.path(), "s.json", &["--kind", "S", "--m", "0", "--n", "5"]);
    let out = mmslab(&["classify", "--input", &s, "--max-points", "32"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_setting_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_mmslab"))
        .args(["accept", "--only", "11"])
        .env("MMSLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_reproducible_and_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let r = gen(dir.path(), "r.json", &["--kind", "R", "--h", "0.25", "--extent", "4"]);
    let t = gen(dir.path(), "t.json", &["--kind", "T", "--circle-points", "16", "--levels", "2"]);
    let args = ["compare", "--x", &r, "--y", &t, "--seed", "7", "--budget", "4"];
    let first = mmslab(&args);
    let second = mmslab(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);

    let v = json(&first.stdout);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["params"]["budget"], 4);
    let lower = v["result"]["lower"]["value"].as_f64().unwrap();
    let upper = v["result"]["upper"]["value"].as_f64().unwrap();
    assert!(lower <= upper);
    assert_eq!(v["result"]["upper"]["provenance"], "bound-upper");
    assert_floats_are_quantities(&v["result"], false, "result");

    let c = mmslab(&["classify", "--input", &t]);
    assert!(c.status.success());
    let v = json(&c.stdout);
    assert_floats_are_quantities(&v["result"], false, "result");
}

#[test]
fn flr_and_fx_on_a_glued_pair() {
    let dir = tempfile::tempdir().unwrap();
    let r = gen(dir.path(), "r.json", &["--kind", "R", "--h", "0.5", "--extent", "2"]);
    let corr = path(dir.path(), "corr.json");
    // The grid's base is its middle point.
    std::fs::write(&corr, r#"{"pairs": [[4, 4]], "slack": 0}"#).unwrap();

    let out = mmslab(&["flr", "--x", &r, "--y", &r, "--corr", &corr, "--l", "2", "--r", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    assert_eq!(v["result"]["status"], "optimal");
    assert_eq!(v["result"]["witness"]["values"].as_array().unwrap().len(), 18);
    assert!(v["result"]["value"]["value"].as_f64().unwrap() >= 0.0);

    // Identical spaces glued along the diagonal are at distance zero.
    let diagonal = path(dir.path(), "diagonal.json");
    std::fs::write(&diagonal, r#"{"pairs": [[0,0],[1,1],[2,2],[3,3],[4,4],[5,5],[6,6],[7,7],[8,8]], "slack": 0}"#).unwrap();
    let out = mmslab(&["fx", "--x", &r, "--y", &r, "--corr", &diagonal, "--gluing", "pointed"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert!(v["result"]["value"]["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn missing_base_pair_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let r = gen(dir.path(), "r.json", &["--kind", "R", "--h", "0.5", "--extent", "2"]);
    let corr = path(dir.path(), "corr.json");
    std::fs::write(&corr, r#"{"pairs": [[0, 0]], "slack": 0}"#).unwrap();
    let out = mmslab(&["fx", "--x", &r, "--y", &r, "--corr", &corr]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tangent_scan_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let r = gen(dir.path(), "r.json", &["--kind", "R", "--h", "0.05", "--extent", "10"]);
    let csv = path(dir.path(), "scan.csv");
    let out = mmslab(&["tangent-scan", "--input", &r, "--r0", "1", "--lambda", "2", "--kmax", "2", "--csv", &csv]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    let entries = v["result"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["verdict"] == "R"));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("r,r_lower,r_upper,"));
    assert_eq!(table.lines().count(), entries.len() + 1);
}

#[test]
fn probes_emit_reports_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let s = gen(dir.path(), "s.json", &["--kind", "S", "--m", "-2", "--n", "3"]);
    let csv = path(dir.path(), "t.csv");
    for probe in [
        vec!["uniformity", "--input", &s],
        vec!["cover", "--input", &s, "--radius", "4"],
        vec!["doubling", "--input", &s, "--centers", "4"],
        vec!["hausdorff", "--input", &s, "--delta", "1"],
        vec!["hausdorff", "--m", "-2", "--n", "3", "--delta", "1", "--projection"],
        vec!["separation", "--input", &s],
        vec!["stress", "--star", "3", "--p", "1", "--dim", "4", "--restarts", "4"],
        vec!["heisenberg", "--samples", "50", "--growth-samples", "50"],
    ] {
        let mut args = vec!["probe"];
        args.extend(probe.iter().copied());
        args.extend(["--csv", csv.as_str()]);
        let out = mmslab(&args);
        assert!(out.status.success(), "{probe:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out.stdout);
        assert_floats_are_quantities(&v["result"], false, probe[0]);
        assert!(std::fs::read_to_string(&csv).unwrap().lines().count() >= 2, "{probe:?}");
    }
}

#[test]
fn pairs_on_the_dyadic_space() {
    let dir = tempfile::tempdir().unwrap();
    let s = gen(dir.path(), "s.json", &["--kind", "S", "--m", "0", "--n", "3"]);
    let out = mmslab(&["pairs", "--input", &s, "--max-d", "1", "--verify"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    let list = v["result"].as_array().unwrap();
    // Each point pairs with its neighbour across the lowest bit, listed once.
    assert_eq!(list.len(), 8);
    assert!(list.iter().all(|p| p["properties_hold"] == true && p["margin"]["value"] == 0.0));
}

#[test]
fn accept_prints_a_table() {
    let out = mmslab(&["accept", "--only", "3,9,11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    let out = mmslab(&["accept", "--only", "13"]);
    assert_eq!(out.status.code(), Some(1));
}
