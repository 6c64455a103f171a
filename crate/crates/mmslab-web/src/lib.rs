//! Three operations for the demo page. Every call takes a space description
//! as JSON and returns JSON, so the page needs no bindings beyond strings.

use mmslab::besicovitch::{classify_uniform, default_floor, default_tol};
use mmslab::dstar::{model_distance, Model, ModelKind, ScanConfig};
use mmslab::geoprobe::{ball_masses, dyadic_radii, uniformity_defect_at, stride_sample};
use mmslab::mms_core::{rescale, PointedMMS};
use mmslab::model_spaces::{make_r_grid, make_s, make_t, STruncationSpec, TTruncationSpec};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// The page runs on the main thread; larger spaces freeze it.
pub const MAX_POINTS: usize = 4096;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind")]
pub enum SpaceSpec {
    R { h: f64, extent: f64 },
    S { m: i32, n: i32 },
    T { circle_points: u32, levels: u32 },
}

impl SpaceSpec {
    fn points(&self) -> f64 {
        match *self {
            SpaceSpec::R { h, extent } => 2.0 * (extent / h).floor() + 1.0,
            SpaceSpec::S { m, n } => 2f64.powi(n - m + 1),
            SpaceSpec::T { circle_points, levels } => circle_points as f64 * 2f64.powi(levels as i32),
        }
    }

    pub fn build(&self) -> Result<PointedMMS, String> {
        let n = self.points();
        if !(n <= MAX_POINTS as f64) {
            return Err(format!("{n} points is more than the demo allows ({MAX_POINTS})"));
        }
        let built = match *self {
            SpaceSpec::R { h, extent } => make_r_grid(h, extent),
            SpaceSpec::S { m, n } => STruncationSpec::new(m, n).and_then(make_s),
            SpaceSpec::T { circle_points, levels } => TTruncationSpec::new(circle_points, 0, levels).and_then(make_t),
        };
        built.map_err(|e| e.to_string())
    }
}

fn parse(spec: &str) -> Result<PointedMMS, String> {
    let spec: SpaceSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    spec.build()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Profile {
    points: usize,
    radii: Vec<f64>,
    /// Mass of the closed ball at the base.
    masses: Vec<f64>,
    max_defect: f64,
}

pub fn ball_profile_json(spec: &str) -> Result<String, String> {
    let p = parse(spec)?;
    let x = &p.space;
    let lo = x.min_positive_distance().unwrap_or(1.0);
    let radii = dyadic_radii(lo, x.diameter().max(lo));
    let masses = ball_masses(x, p.base, &radii);
    let centers = stride_sample(x.n(), 64);
    let inner: Vec<f64> = radii.iter().copied().filter(|&r| r <= x.diameter() / 2.0).collect();
    let max_defect = if inner.is_empty() {
        0.0
    } else {
        uniformity_defect_at(x, &centers, &inner).map_err(|e| e.to_string())?.max_defect
    };
    to_json(&Profile {
        points: x.n(),
        radii,
        masses,
        max_defect,
    })
}

pub fn classify_json(spec: &str) -> Result<String, String> {
    let p = parse(spec)?;
    let res = classify_uniform(&p.space, default_floor(&p.space), default_tol(&p.space)).map_err(|e| e.to_string())?;
    to_json(&res)
}

#[derive(Serialize)]
struct Distance {
    model: Model,
    lower: f64,
    upper: f64,
}

/// Distance bounds from the space seen at scale `r` around its base to the
/// best line, dyadic and circle models.
pub fn model_distances_json(spec: &str, r: f64) -> Result<String, String> {
    let p = parse(spec)?;
    let x = rescale(&p, r).map_err(|e| e.to_string())?;
    let cfg = ScanConfig {
        max_points: 128,
        golden_steps: 10,
        ..ScanConfig::default()
    };
    let out: Result<Vec<Distance>, String> = [ModelKind::R, ModelKind::S, ModelKind::T]
        .into_iter()
        .map(|kind| {
            let m = model_distance(&x, kind, &cfg).map_err(|e| e.to_string())?;
            Ok(Distance {
                model: m.model,
                lower: m.estimate.lower,
                upper: m.estimate.upper,
            })
        })
        .collect();
    to_json(&out?)
}

#[wasm_bindgen]
pub fn ball_profile(spec: &str) -> Result<String, JsError> {
    ball_profile_json(spec).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify(spec: &str) -> Result<String, JsError> {
    classify_json(spec).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn model_distances(spec: &str, r: f64) -> Result<String, JsError> {
    model_distances_json(spec, r).map_err(|e| JsError::new(&e))
}
