use mmslab_web::{ball_profile_json, classify_json, model_distances_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn line_profile_grows_linearly() {
    let v = parse(ball_profile_json(r#"{"kind": "R", "h": 0.125, "extent": 8}"#).unwrap());
    assert_eq!(v["points"], 129);
    for (r, m) in v["radii"].as_array().unwrap().iter().zip(v["masses"].as_array().unwrap()) {
        let (r, m) = (r.as_f64().unwrap(), m.as_f64().unwrap());
        if r <= 8.0 {
            // 2r/h + 1 points of weight h/2.
            assert!((m - (r + 0.0625)).abs() < 1e-9, "r = {r}, m = {m}");
        }
    }
}

#[test]
fn classifies_the_three_families() {
    let kind = |spec: &str| parse(classify_json(spec).unwrap())["verdict"]["kind"].as_str().unwrap().to_owned();
    assert_eq!(kind(r#"{"kind": "R", "h": 0.05, "extent": 20}"#), "r_like");
    assert_eq!(kind(r#"{"kind": "S", "m": -6, "n": 4}"#), "s_like");
    assert_eq!(kind(r#"{"kind": "T", "circle_points": 64, "levels": 4}"#), "t_like");
}

#[test]
fn the_line_is_closest_to_the_line_model() {
    let v = parse(model_distances_json(r#"{"kind": "R", "h": 0.05, "extent": 10}"#, 1.0).unwrap());
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["model"]["kind"], "r");
    let line = rows[0]["upper"].as_f64().unwrap();
    assert!(line < 1e-3);
    for other in &rows[1..] {
        assert!(other["lower"].as_f64().unwrap() > line);
    }
}

#[test]
fn rejects_bad_input() {
    assert!(ball_profile_json("{").is_err());
    assert!(classify_json(r#"{"kind": "S", "m": -10, "n": 6}"#).is_err());
    assert!(model_distances_json(r#"{"kind": "R", "h": 0.1, "extent": 2}"#, -1.0).is_err());
}
