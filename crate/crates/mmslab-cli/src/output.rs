use std::io::Write;
use std::path::{Path, PathBuf};

use mmslab::dstar::{DStarEstimate, Model, ModelEstimate};
use mmslab::mms_core::Correspondence;
use mmslab::report::Quantity;
use serde::Serialize;

use crate::failure::Failure;
use crate::Global;

/// Bisection half-width used as the tolerance of certified `d*` bounds.
pub fn bisection_tol(iterations: usize) -> f64 {
    0.5f64.powi(iterations as i32 + 1)
}

#[derive(Serialize)]
pub struct RunConfig<'a, P: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub output: Option<&'a Path>,
    pub csv: Option<&'a Path>,
    pub max_points: usize,
    pub params: &'a P,
}

#[derive(Serialize)]
struct Report<'a, P: Serialize, R: Serialize> {
    command: &'a str,
    config: RunConfig<'a, P>,
    result: R,
}

fn write_to(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::io(e.to_string()))
        }
    }
}

/// Writes the report envelope with the resolved configuration.
pub fn emit<P: Serialize, R: Serialize>(
    g: &Global,
    command: &str,
    inputs: &[&Path],
    params: &P,
    result: R,
) -> anyhow::Result<()> {
    let report = Report {
        command,
        config: RunConfig {
            command,
            seed: g.seed,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            output: g.out.as_deref(),
            csv: g.csv.as_deref(),
            max_points: g.max_points,
            params,
        },
        result,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_to(g.out.as_ref(), &text)?;
    Ok(())
}

/// Writes a CSV table when `--csv` is given.
pub fn emit_csv<R: Serialize>(g: &Global, rows: impl IntoIterator<Item = R>) -> anyhow::Result<()> {
    let Some(path) = &g.csv else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes preformatted CSV text when `--csv` is given.
pub fn emit_csv_text(g: &Global, text: &str) -> anyhow::Result<()> {
    if let Some(path) = &g.csv {
        std::fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct CorrespondenceView {
    pub pairs: Vec<(usize, usize)>,
    pub slack: Quantity,
}

impl From<&Correspondence> for CorrespondenceView {
    fn from(c: &Correspondence) -> Self {
        CorrespondenceView {
            pairs: c.pairs.clone(),
            slack: Quantity::exact(c.slack),
        }
    }
}

#[derive(Serialize)]
pub struct EstimateView {
    pub lower: Quantity,
    pub upper: Quantity,
    pub witness_corr: CorrespondenceView,
}

impl EstimateView {
    pub fn new(e: &DStarEstimate, tol: f64) -> Self {
        EstimateView {
            lower: Quantity::lower(e.lower, tol),
            upper: Quantity::upper(e.upper, tol),
            witness_corr: (&e.witness_corr).into(),
        }
    }
}

#[derive(Serialize)]
pub struct ModelView {
    pub kind: &'static str,
    /// Scale of the dyadic model or diameter of the circles; absent for the line.
    pub parameter: Option<Quantity>,
    pub lower: Quantity,
    pub upper: Quantity,
}

impl ModelView {
    pub fn new(m: &ModelEstimate, tol: f64) -> Self {
        let (kind, parameter) = match m.model {
            Model::R => ("r", None),
            Model::S { scale } => ("s", Some(scale)),
            Model::T { diameter } => ("t", Some(diameter)),
        };
        ModelView {
            kind,
            parameter: parameter.map(Quantity::exact),
            lower: Quantity::lower(m.estimate.lower, tol),
            upper: Quantity::upper(m.estimate.upper, tol),
        }
    }
}
