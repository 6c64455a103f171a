use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use mmslab::acceptance;
use mmslab::besicovitch::{
    classify_uniform, default_floor, default_tol, find_pairs_with, verify_pair_properties, PairSearch, Verdict as Class,
    PAIR_TOL, PROPERTY_TOL,
};
use mmslab::dstar::{dstar_estimate, ScanConfig, UpperConfig};
use mmslab::lip_dual::{f_lr, f_x_detailed, LipschitzDualProblem, FX_ITERATIONS, WITNESS_TOL};
use mmslab::mms_core::{glue, glue_pointed, to_json, Glued, TIE_TOL};
use mmslab::model_spaces::{
    make_heisenberg_sample, make_r_grid, make_s, make_spider_midpoints, make_star_sn, make_t, STruncationSpec,
    TTruncationSpec,
};
use mmslab::report::{Quantities, Quantity};
use serde::Serialize;

use crate::failure::Failure;
use crate::input;
use crate::output::{bisection_tol, emit, emit_csv, emit_csv_text, EstimateView, ModelView};
use crate::Global;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[value(name = "S")]
    S,
    #[value(name = "T")]
    T,
    #[value(name = "R")]
    R,
    Star,
    Spider,
    Heis,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Finest dyadic level (S, and the flip unit exponent of T).
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<i32>,
    /// Coarsest dyadic level for S; arm count for star and spider.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i32>,
    /// Grid step for R.
    #[arg(long)]
    pub h: Option<f64>,
    /// Half-length for R; gauge radius for heis.
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub circle_points: Option<u32>,
    #[arg(long)]
    pub levels: Option<u32>,
    /// Sample size for heis.
    #[arg(long)]
    pub count: Option<usize>,
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| Failure::parse(format!("--{flag} is required for --kind {kind}")).into())
}

pub(crate) fn guard(n: usize, g: &Global) -> anyhow::Result<()> {
    if n > g.max_points {
        return Err(Failure::size_guard(format!("{n} points exceeds --max-points {}", g.max_points)).into());
    }
    Ok(())
}

pub fn gen(g: &Global, a: &GenArgs) -> anyhow::Result<()> {
    // Check the size before building anything large.
    let (space, base) = match a.kind {
        Kind::S => {
            let spec = STruncationSpec::new(need(a.m, "m", "S")?, need(a.n, "n", "S")?)?;
            guard(1usize.checked_shl(spec.bits()).unwrap_or(usize::MAX), g)?;
            let p = make_s(spec)?;
            (p.space, Some(p.base))
        }
        Kind::T => {
            let cp = need(a.circle_points, "circle-points", "T")?;
            let levels = need(a.levels, "levels", "T")?;
            let m = a.m.unwrap_or(0);
            let m = u32::try_from(m).map_err(|_| Failure::parse("--m must be nonnegative for T"))?;
            let spec = TTruncationSpec::new(cp, m, levels)?;
            guard((cp as usize).saturating_mul(1usize.checked_shl(levels).unwrap_or(usize::MAX)), g)?;
            let p = make_t(spec)?;
            (p.space, Some(p.base))
        }
        Kind::R => {
            let h = need(a.h, "h", "R")?;
            let extent = need(a.extent, "extent", "R")?;
            if h > 0.0 && extent / h < 1e9 {
                guard(2 * (extent / h).floor() as usize + 1, g)?;
            }
            let p = make_r_grid(h, extent)?;
            (p.space, Some(p.base))
        }
        Kind::Star => {
            let n = need(a.n, "n", "star")?;
            let p = make_star_sn(u32::try_from(n).map_err(|_| Failure::parse("--n must be positive"))?)?;
            (p.space, Some(p.base))
        }
        Kind::Spider => {
            let n = need(a.n, "n", "spider")?;
            (make_spider_midpoints(u32::try_from(n).map_err(|_| Failure::parse("--n must be positive"))?)?, Some(0))
        }
        Kind::Heis => {
            let count = need(a.count, "count", "heis")?;
            guard(count, g)?;
            let p = make_heisenberg_sample(count, a.extent.unwrap_or(1.0), g.seed)?;
            (p.space, Some(p.base))
        }
    };
    guard(space.n(), g)?;
    let mut text = to_json(&space, base);
    text.push('\n');
    match &g.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gluing {
    /// Every matched pair at the slack, bases included.
    Uniform,
    /// Bases identified, other matched pairs at the slack.
    Pointed,
}

#[derive(Args, Debug, Serialize)]
pub struct GlueInputs {
    /// First space (the measure μ).
    #[arg(long)]
    pub x: PathBuf,
    /// Second space (the measure ν).
    #[arg(long)]
    pub y: PathBuf,
    /// Correspondence JSON `{pairs, slack}`.
    #[arg(long)]
    pub corr: PathBuf,
    #[arg(long, value_enum, default_value = "uniform")]
    pub gluing: Gluing,
}

impl GlueInputs {
    fn paths(&self) -> [&Path; 3] {
        [&self.x, &self.y, &self.corr]
    }

    /// The glued space with `μ − ν` on it.
    fn load(&self, g: &Global) -> anyhow::Result<(Glued, Vec<f64>, Vec<f64>)> {
        let x = input::pointed(&self.x, None, g.max_points)?;
        let y = input::pointed(&self.y, None, g.max_points)?;
        let corr = input::correspondence(&self.corr)?;
        let glued = match self.gluing {
            Gluing::Uniform => glue(&x, &y, &corr)?,
            Gluing::Pointed => glue_pointed(&x, &y, &corr)?,
        };
        let n = glued.space.n();
        let mut mu = vec![0.0; n];
        let mut nu = vec![0.0; n];
        for (i, &k) in glued.map_x.iter().enumerate() {
            mu[k] = x.space.weight(i);
        }
        for (j, &k) in glued.map_y.iter().enumerate() {
            nu[k] = y.space.weight(j);
        }
        Ok((glued, mu, nu))
    }
}

#[derive(Args, Debug, Serialize)]
pub struct FlrArgs {
    #[command(flatten)]
    pub glue: GlueInputs,
    /// Lipschitz constant.
    #[arg(long)]
    pub l: f64,
    /// Support radius around the base.
    #[arg(long)]
    pub r: f64,
}

#[derive(Serialize)]
struct FlrResult {
    value: Quantity,
    witness: Quantities,
    status: mmslab::lip_dual::LpStatus,
    duality_gap: Quantity,
}

pub fn flr(g: &Global, a: &FlrArgs) -> anyhow::Result<()> {
    let (glued, mu, nu) = a.glue.load(g)?;
    let problem = LipschitzDualProblem {
        base: glued.base,
        lipschitz: a.l,
        radius: a.r,
        signed_mass: mu.iter().zip(&nu).map(|(m, n)| m - n).collect(),
        space: glued.space,
    };
    let res = f_lr(&problem)?;
    emit(
        g,
        "flr",
        &a.glue.paths(),
        a,
        FlrResult {
            value: Quantity::measured(res.value, WITNESS_TOL),
            witness: Quantities::measured(res.witness, WITNESS_TOL),
            status: res.status,
            duality_gap: Quantity::measured(res.duality_gap, WITNESS_TOL),
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct FxArgs {
    #[command(flatten)]
    pub glue: GlueInputs,
    /// Bisection steps.
    #[arg(long, default_value_t = FX_ITERATIONS)]
    pub iterations: usize,
}

#[derive(Serialize)]
struct FxResult {
    value: Quantity,
    bracket_lower: Quantity,
    bracket_upper: Quantity,
    evaluations: usize,
    closest_margin: Quantity,
}

pub fn fx(g: &Global, a: &FxArgs) -> anyhow::Result<()> {
    let (glued, mu, nu) = a.glue.load(g)?;
    let out = f_x_detailed(&glued.space, glued.base, &mu, &nu, a.iterations)?;
    let half = 0.5 * (out.bracket.1 - out.bracket.0);
    emit(
        g,
        "fx",
        &a.glue.paths(),
        a,
        FxResult {
            value: Quantity::measured(out.value, half),
            bracket_lower: Quantity::lower(out.bracket.0, 0.0),
            bracket_upper: Quantity::upper(out.bracket.1, 0.0),
            evaluations: out.evaluations,
            closest_margin: Quantity::measured(out.closest_margin, WITNESS_TOL),
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// Random pair swaps tried after the structured correspondences.
    #[arg(long, default_value_t = 8)]
    pub budget: usize,
    #[arg(long, default_value_t = FX_ITERATIONS)]
    pub fx_iterations: usize,
}

pub fn compare(g: &Global, a: &CompareArgs) -> anyhow::Result<()> {
    let x = input::pointed(&a.x, None, g.max_points)?;
    let y = input::pointed(&a.y, None, g.max_points)?;
    let cfg = UpperConfig {
        search_budget: a.budget,
        fx_iterations: a.fx_iterations,
        seed: g.seed,
    };
    let est = dstar_estimate(&x, &y, &cfg)?;
    emit(g, "compare", &[&a.x, &a.y], a, EstimateView::new(&est, bisection_tol(a.fx_iterations)))
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Point to scan around; defaults to the file's base.
    #[arg(long)]
    pub center: Option<usize>,
    #[arg(long)]
    pub r0: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub kmax: usize,
    /// Radius of the compared window after rescaling.
    #[arg(long, default_value_t = 4.0)]
    pub window: f64,
    /// Points kept in the window after coarsening.
    #[arg(long, default_value_t = mmslab::dstar::DEFAULT_MAX_POINTS)]
    pub window_points: usize,
    #[arg(long, default_value_t = 20)]
    pub golden_steps: usize,
    #[arg(long, default_value_t = 24)]
    pub fx_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub budget: usize,
}

#[derive(Serialize)]
struct ScanEntryView {
    r: Quantity,
    points_in_window: usize,
    coarsening: Quantity,
    dist_to_r: ModelView,
    dist_to_s: ModelView,
    dist_to_t: ModelView,
    verdict: &'static str,
}

#[derive(Serialize)]
struct ScanView {
    center: usize,
    entries: Vec<ScanEntryView>,
    floor_reached: Option<Quantity>,
}

pub fn tangent_scan(g: &Global, a: &ScanArgs) -> anyhow::Result<()> {
    let x = input::pointed(&a.input, a.center, g.max_points)?;
    let cfg = ScanConfig {
        window: a.window,
        max_points: a.window_points,
        golden_steps: a.golden_steps,
        fx_iterations: a.fx_iterations,
        search_budget: a.budget,
        seed: g.seed,
    };
    let rep = mmslab::dstar::tangent_scan(&x, a.r0, a.lambda, a.kmax, &cfg)?;
    let tol = bisection_tol(a.fx_iterations);
    let view = ScanView {
        center: rep.center,
        entries: rep
            .entries
            .iter()
            .map(|e| ScanEntryView {
                r: Quantity::exact(e.r),
                points_in_window: e.points_in_window,
                coarsening: Quantity::exact(e.coarsening),
                dist_to_r: ModelView::new(&e.dist_to_r, tol),
                dist_to_s: ModelView::new(&e.dist_to_s, tol),
                dist_to_t: ModelView::new(&e.dist_to_t, tol),
                verdict: e.verdict.as_str(),
            })
            .collect(),
        floor_reached: rep.floor_reached.map(Quantity::exact),
    };
    emit_csv_text(g, &rep.to_csv())?;
    emit(g, "tangent-scan", &[&a.input], a, view)
}

#[derive(Args, Debug, Serialize)]
pub struct PairsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Largest pair distance searched.
    #[arg(long)]
    pub max_d: f64,
    /// Pairs at or below this distance are skipped.
    #[arg(long, default_value_t = 0.0)]
    pub min_d: f64,
    /// Also check the pair identities for every certificate.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Serialize)]
struct PairView {
    a: usize,
    b: usize,
    d: Quantity,
    margin: Quantity,
    properties_hold: Option<bool>,
    property_error: Option<Quantity>,
}

#[derive(Serialize)]
struct PairRow {
    a: usize,
    b: usize,
    d: f64,
    margin: f64,
}

pub fn pairs(g: &Global, a: &PairsArgs) -> anyhow::Result<()> {
    let (x, _) = input::space(&a.input, g.max_points)?;
    let found = find_pairs_with(
        &x,
        &PairSearch {
            min_d: a.min_d,
            max_d: a.max_d,
            anchors: None,
        },
    )?;
    let mut views = Vec::with_capacity(found.len());
    for p in &found {
        let (hold, err) = if a.verify {
            let rep = verify_pair_properties(&x, p)?;
            let worst = rep.checks.iter().filter_map(|c| c.max_error).fold(0.0, f64::max);
            (Some(rep.all_hold), Some(Quantity::measured(worst, PROPERTY_TOL)))
        } else {
            (None, None)
        };
        views.push(PairView {
            a: p.a,
            b: p.b,
            d: Quantity::exact(p.d),
            margin: Quantity::measured(p.margin, PAIR_TOL),
            properties_hold: hold,
            property_error: err,
        });
    }
    emit_csv(
        g,
        found.iter().map(|p| PairRow {
            a: p.a,
            b: p.b,
            d: p.d,
            margin: p.margin,
        }),
    )?;
    emit(g, "pairs", &[&a.input], a, views)
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Smallest scale examined; four times the smallest distance by default.
    #[arg(long)]
    pub floor: Option<f64>,
    /// Allowed deviation from linear ball growth; four times the largest weight by default.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Serialize)]
struct ClassView {
    verdict: &'static str,
    delta: Option<Quantity>,
    floor: Quantity,
    tol: Quantity,
    uniformity_defect: Quantity,
    density: Quantity,
    delta_min: Option<Quantity>,
    pair_count: usize,
    pair_scales: Vec<i32>,
    epsilon_connectivity: Option<Vec<(Quantity, usize)>>,
    reference: usize,
    radius: Quantity,
    pair_search_radius: Quantity,
    notes: Vec<String>,
}

pub fn classify(g: &Global, a: &ClassifyArgs) -> anyhow::Result<()> {
    let (x, _) = input::space(&a.input, g.max_points)?;
    let floor = a.floor.unwrap_or_else(|| default_floor(&x));
    let tol = a.tol.unwrap_or_else(|| default_tol(&x));
    let res = classify_uniform(&x, floor, tol)?;
    let (verdict, delta) = match res.verdict {
        Class::RLike => ("r_like", None),
        Class::TLike { delta } => ("t_like", Some(Quantity::measured(delta, TIE_TOL))),
        Class::SLike => ("s_like", None),
        Class::Unknown => ("unknown", None),
    };
    let e = &res.evidence;
    let view = ClassView {
        verdict,
        delta,
        floor: Quantity::exact(res.floor),
        tol: Quantity::exact(res.tol),
        uniformity_defect: Quantity::measured(e.uniformity_defect, TIE_TOL),
        density: Quantity::measured(e.density, res.tol),
        delta_min: e.delta_min.map(|d| Quantity::measured(d, TIE_TOL)),
        pair_count: e.pair_count,
        pair_scales: e.pair_scales.clone(),
        epsilon_connectivity: e
            .epsilon_connectivity
            .as_ref()
            .map(|v| v.iter().map(|&(eps, c)| (Quantity::exact(eps), c)).collect()),
        reference: e.reference,
        radius: Quantity::exact(e.radius),
        pair_search_radius: Quantity::exact(e.pair_search_radius),
        notes: e.notes.clone(),
    };
    emit(g, "classify", &[&a.input], a, view)
}

#[derive(Args, Debug, Serialize)]
pub struct AcceptArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
}

pub fn accept(g: &Global, a: &AcceptArgs) -> anyhow::Result<()> {
    let ids: Vec<usize> = if a.only.is_empty() {
        (1..=acceptance::CRITERIA).collect()
    } else {
        a.only.clone()
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::CRITERIA) {
        return Err(Failure::parse(format!("no criterion {bad}")).into());
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let out = acceptance::run(id);
        println!("{}", out.line());
        outcomes.push(out);
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if g.out.is_some() {
        emit(g, "accept", &[], a, &outcomes)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::acceptance(format!("failed criteria: {failed:?}")).into())
    }
}
