use serde::{Deserialize, Serialize};

use super::lower::base_clusters;
use super::{dstar_lower_tent, glued_fx, upper_search_below, DStarEstimate, UpperConfig, SANDWICH_TOL};
use crate::error::{Error, Result};
use crate::mms_core::{ball_measure, rescale, restrict, Ball, Correspondence, PointedMMS, TIE_TOL};
use crate::model_spaces::{make_r_grid, make_s, make_t, scale_space, STruncationSpec, TTruncationSpec};

/// Most points kept in a space after coarsening.
pub const DEFAULT_MAX_POINTS: usize = 384;
/// Points in the unit ball below which a scan stops.
pub const FLOOR_POINTS: usize = 8;
/// Data-driven circle diameters tried before the golden-section search.
const MAX_SEEDS: usize = 8;
/// Largest dyadic model built before windowing, in bits.
const MAX_MODEL_BITS: i32 = 17;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Radius of the window compared around the base.
    pub window: f64,
    pub max_points: usize,
    /// Golden-section steps for the model scale.
    pub golden_steps: usize,
    pub fx_iterations: usize,
    pub search_budget: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            window: 4.0,
            max_points: DEFAULT_MAX_POINTS,
            golden_steps: 20,
            fx_iterations: 24,
            search_budget: 0,
            seed: 0,
        }
    }
}

impl ScanConfig {
    fn upper(&self) -> UpperConfig {
        UpperConfig {
            search_budget: self.search_budget,
            fx_iterations: self.fx_iterations,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    R,
    S,
    T,
}

/// A uniform model space: the line, the dyadic space at a scale, or the
/// circle space with circles of the given diameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    R,
    S { scale: f64 },
    T { diameter: f64 },
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::R => ModelKind::R,
            Model::S { .. } => ModelKind::S,
            Model::T { .. } => ModelKind::T,
        }
    }

    /// The model at resolution about `u`, normalised so the open unit ball
    /// at the base has mass one, restricted to the closed `window`-ball.
    pub fn build(&self, u: f64, radius: f64) -> Result<PointedMMS> {
        if !(u > 0.0 && radius > 0.0) {
            return Err(Error::arg("resolution and window must be positive"));
        }
        let full = match *self {
            Model::R => rescale(&make_r_grid(u, radius + u)?, 1.0)?,
            Model::S { scale } => {
                let mut m = (u * scale).log2().floor() as i32;
                let n = ((radius * scale).log2().ceil() as i32).max(m);
                m = m.max(n + 1 - MAX_MODEL_BITS);
                rescale(&make_s(STruncationSpec { m, n })?, scale)?
            }
            Model::T { diameter } => {
                let cp = (((2.0 * diameter / u).ceil() as u32).div_ceil(2) * 2).clamp(8, 2048);
                let levels = ((radius / diameter + 1.0).log2().ceil() as u32).max(1);
                let t = make_t(TTruncationSpec {
                    circle_points: cp,
                    m: 0,
                    n_levels: levels,
                })?;
                rescale(&t, 1.0 / diameter)?
            }
        };
        window(&full, radius)
    }
}

/// The closed ball of the given radius around the base as a pointed space.
pub fn window(p: &PointedMMS, radius: f64) -> Result<PointedMMS> {
    let keep: Vec<usize> = (0..p.space.n())
        .filter(|&i| p.space.d(p.base, i) <= radius + TIE_TOL)
        .collect();
    let base = keep.binary_search(&p.base).expect("the base is in its own ball");
    PointedMMS::new(restrict(&p.space, &keep)?, base)
}

/// Net points chosen greedily in order of distance to the base; `None` once
/// more than `limit` are needed.
fn greedy_net(p: &PointedMMS, delta: f64, limit: usize) -> Option<Vec<usize>> {
    let x = &p.space;
    let h = p.heights();
    let mut order: Vec<usize> = (0..x.n()).collect();
    order.sort_by(|&a, &b| h[a].total_cmp(&h[b]).then(a.cmp(&b)));
    let mut net: Vec<usize> = Vec::new();
    for &i in &order {
        if net.iter().all(|&c| x.d(c, i) >= delta - TIE_TOL) {
            net.push(i);
            if net.len() > limit {
                return None;
            }
        }
    }
    Some(net)
}

fn merge_into(p: &PointedMMS, net: Vec<usize>) -> Result<PointedMMS> {
    let x = &p.space;
    let mut weight = vec![0.0; net.len()];
    for i in 0..x.n() {
        // Near-ties go to the earliest net point so that rounding noise
        // cannot split otherwise identical spaces differently.
        let near = net.iter().map(|&c| x.d(c, i)).fold(f64::INFINITY, f64::min);
        let k = net
            .iter()
            .position(|&c| x.d(c, i) <= near + TIE_TOL)
            .expect("the net is nonempty");
        weight[k] += x.weight(i);
    }
    let mut order: Vec<usize> = (0..net.len()).collect();
    order.sort_by_key(|&k| net[k]);
    let idx: Vec<usize> = order.iter().map(|&k| net[k]).collect();
    let w: Vec<f64> = order.iter().map(|&k| weight[k]).collect();
    let base = idx.binary_search(&p.base).expect("the base opens the net");
    PointedMMS::new(restrict(x, &idx)?.reweighted(w), base)
}

/// Greedy `δ`-net with the mass of every point moved to its nearest net point.
pub fn coarsen(p: &PointedMMS, delta: f64) -> Result<PointedMMS> {
    if !(delta > 0.0) {
        return Ok(p.clone());
    }
    let net = greedy_net(p, delta, usize::MAX).expect("unbounded");
    merge_into(p, net)
}

/// Coarsens with the smallest `min distance · 2^k` that leaves at most
/// `max_points` points; returns the space and that radius (0 if untouched).
pub fn coarsen_to(p: &PointedMMS, max_points: usize) -> Result<(PointedMMS, f64)> {
    if max_points == 0 {
        return Err(Error::arg("max_points must be positive"));
    }
    if p.space.n() <= max_points {
        return Ok((p.clone(), 0.0));
    }
    let mut delta = p.space.min_positive_distance().unwrap_or(1.0) * 2.0;
    loop {
        if let Some(net) = greedy_net(p, delta, max_points) {
            return Ok((merge_into(p, net)?, delta));
        }
        delta *= 2.0;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEstimate {
    pub model: Model,
    pub estimate: DStarEstimate,
}

/// `x` windowed and coarsened, with the resolution models are built at.
struct Prepared {
    x: PointedMMS,
    delta: f64,
    resolution: f64,
}

fn prepare(x: &PointedMMS, cfg: &ScanConfig) -> Result<Prepared> {
    let w = window(x, cfg.window)?;
    let native = w.space.min_positive_distance().unwrap_or(cfg.window);
    let (x, delta) = coarsen_to(&w, cfg.max_points)?;
    Ok(Prepared {
        x,
        delta,
        // Models are built at the native spacing and coarsened the same way,
        // so a model can reproduce `x` exactly.
        resolution: native,
    })
}

fn model_space(prep: &Prepared, model: Model, cfg: &ScanConfig) -> Result<PointedMMS> {
    let m = model.build(prep.resolution, cfg.window)?;
    coarsen(&m, prep.delta)
}

fn upper_at(prep: &Prepared, model: Model, cfg: &ScanConfig, ceiling: f64) -> Result<Option<(f64, Correspondence)>> {
    let m = model_space(prep, model, cfg)?;
    upper_search_below(&prep.x, &m, &cfg.upper(), ceiling)
}

fn finish(prep: &Prepared, model: Model, best: Option<(f64, Correspondence)>, cfg: &ScanConfig) -> Result<ModelEstimate> {
    let m = model_space(prep, model, cfg)?;
    let (upper, witness_corr) = best.unwrap_or_else(|| (0.5, Correspondence::base_only(&prep.x, &m, 0.0)));
    let lower = dstar_lower_tent(&prep.x, &m)?;
    assert!(
        lower <= upper + SANDWICH_TOL,
        "certified lower bound {lower} exceeds certified upper bound {upper}"
    );
    Ok(ModelEstimate {
        model,
        estimate: DStarEstimate {
            lower: lower.min(upper),
            upper,
            witness_corr,
        },
    })
}

/// Distance estimate to one fixed model.
pub fn model_distance_at(x: &PointedMMS, model: Model, cfg: &ScanConfig) -> Result<ModelEstimate> {
    let prep = prepare(x, cfg)?;
    let best = upper_at(&prep, model, cfg, 0.5)?;
    finish(&prep, model, best, cfg)
}

/// Golden-section search of `log scale` over `[a, b]`, after trying `seeds`
/// and both ends. Candidates are only searched below the best value so far.
fn golden(
    prep: &Prepared,
    make: impl Fn(f64) -> Model,
    (a, b): (f64, f64),
    seeds: &[f64],
    cfg: &ScanConfig,
) -> Result<ModelEstimate> {
    let mut best: Option<(f64, Model, Correspondence)> = None;
    let eval = |t: f64, best: &mut Option<(f64, Model, Correspondence)>| -> Result<f64> {
        let model = make(t.exp());
        let ceiling = best.as_ref().map_or(0.5, |b| b.0);
        match upper_at(prep, model, cfg, ceiling)? {
            Some((v, c)) if best.as_ref().is_none_or(|b| v < b.0) => {
                *best = Some((v, model, c));
                Ok(v)
            }
            _ => Ok(ceiling),
        }
    };
    for &t in seeds {
        eval(t, &mut best)?;
    }
    eval(a, &mut best)?;
    eval(b, &mut best)?;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = eval(c, &mut best)?;
    let mut fd = eval(d, &mut best)?;
    for _ in 0..cfg.golden_steps.saturating_sub(2) {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = eval(c, &mut best)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = eval(d, &mut best)?;
        }
    }
    match best {
        Some((v, model, corr)) => finish(prep, model, Some((v, corr)), cfg),
        None => finish(prep, make(a.exp()), None, cfg),
    }
}

fn distance_prepared(prep: &Prepared, kind: ModelKind, cfg: &ScanConfig) -> Result<ModelEstimate> {
    match kind {
        ModelKind::R => {
            let best = upper_at(prep, Model::R, cfg, 0.5)?;
            finish(prep, Model::R, best, cfg)
        }
        // The dyadic family repeats under doubling, so one octave suffices.
        ModelKind::S => golden(prep, |s| Model::S { scale: s }, (0.0, 2f64.ln()), &[], cfg),
        ModelKind::T => {
            // A circle through the base shows up as a cluster whose radius
            // is the circle's diameter.
            let lo = (4.0 * prep.resolution).max(cfg.window / 64.0);
            let mut seeds: Vec<f64> = base_clusters(&prep.x)
                .into_iter()
                .filter(|&(rho, gap)| rho >= lo && rho <= cfg.window && gap.is_finite())
                .map(|(rho, _)| rho.ln())
                .collect();
            seeds.truncate(MAX_SEEDS);
            golden(
                prep,
                |c| Model::T { diameter: c },
                ((cfg.window / 8.0).ln(), (cfg.window / 2.0).ln()),
                &seeds,
                cfg,
            )
        }
    }
}

/// Distance estimate to the best-fitting member of a model family.
pub fn model_distance(x: &PointedMMS, kind: ModelKind, cfg: &ScanConfig) -> Result<ModelEstimate> {
    let prep = prepare(x, cfg)?;
    distance_prepared(&prep, kind, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    R,
    S,
    T,
    Ambiguous,
}

impl Verdict {
    fn of(estimates: &[&ModelEstimate]) -> Verdict {
        let mut sorted: Vec<&&ModelEstimate> = estimates.iter().collect();
        sorted.sort_by(|a, b| a.estimate.upper.total_cmp(&b.estimate.upper));
        let (win, next) = (sorted[0], sorted[1]);
        if win.estimate.upper < next.estimate.lower {
            match win.model.kind() {
                ModelKind::R => Verdict::R,
                ModelKind::S => Verdict::S,
                ModelKind::T => Verdict::T,
            }
        } else {
            Verdict::Ambiguous
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::R => "R",
            Verdict::S => "S",
            Verdict::T => "T",
            Verdict::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub r: f64,
    pub points_in_window: usize,
    pub coarsening: f64,
    pub dist_to_r: ModelEstimate,
    pub dist_to_s: ModelEstimate,
    pub dist_to_t: ModelEstimate,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentScanReport {
    pub center: usize,
    pub r0: f64,
    pub lambda: f64,
    pub scales: Vec<f64>,
    pub entries: Vec<ScanEntry>,
    /// First scale skipped because its unit ball held too few points.
    pub floor_reached: Option<f64>,
    pub config: ScanConfig,
}

impl TangentScanReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("r,r_lower,r_upper,s_lower,s_upper,s_scale,t_lower,t_upper,t_diameter,verdict\n");
        for e in &self.entries {
            let s_scale = match e.dist_to_s.model {
                Model::S { scale } => scale,
                _ => f64::NAN,
            };
            let t_diam = match e.dist_to_t.model {
                Model::T { diameter } => diameter,
                _ => f64::NAN,
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                e.r,
                e.dist_to_r.estimate.lower,
                e.dist_to_r.estimate.upper,
                e.dist_to_s.estimate.lower,
                e.dist_to_s.estimate.upper,
                s_scale,
                e.dist_to_t.estimate.lower,
                e.dist_to_t.estimate.upper,
                t_diam,
                e.verdict.as_str()
            ));
        }
        out
    }
}

fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Compares `T_r X` with the three model families at `r = r0 λ^{−k}`.
pub fn tangent_scan(x: &PointedMMS, r0: f64, lambda: f64, k_max: usize, cfg: &ScanConfig) -> Result<TangentScanReport> {
    if !(lambda > 1.0 && lambda <= 4.0) {
        return Err(Error::arg("lambda must lie in (1, 4]"));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::arg("r0 must be positive"));
    }
    if r0 > x.space.diameter() {
        return Err(Error::arg("r0 exceeds the diameter"));
    }
    let h = x.heights();
    let mut scales = Vec::new();
    let mut floor_reached = None;
    for k in 0..=k_max {
        let r = r0 * lambda.powi(-(k as i32));
        let inside = h.iter().filter(|&&d| d < r - TIE_TOL).count();
        if inside < FLOOR_POINTS {
            if k == 0 {
                return Err(Error::ResolutionFloor { scale: r });
            }
            floor_reached = Some(r);
            break;
        }
        scales.push(r);
    }
    let preps = par_map(&scales, |&r| -> Result<(f64, usize, Prepared)> {
        let xr = rescale(x, r)?;
        let n = window(&xr, cfg.window)?.space.n();
        Ok((r, n, prepare(&xr, cfg)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, ModelKind)> = (0..preps.len())
        .flat_map(|i| [ModelKind::R, ModelKind::S, ModelKind::T].map(|k| (i, k)))
        .collect();
    let mut results = par_map(&jobs, |&(i, kind)| distance_prepared(&preps[i].2, kind, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let mut entries = Vec::with_capacity(preps.len());
    for (r, n, prep) in &preps {
        let (a, b, c) = (results.next().unwrap(), results.next().unwrap(), results.next().unwrap());
        let verdict = Verdict::of(&[&a, &b, &c]);
        entries.push(ScanEntry {
            r: *r,
            points_in_window: *n,
            coarsening: prep.delta,
            dist_to_r: a,
            dist_to_s: b,
            dist_to_t: c,
            verdict,
        });
    }
    Ok(TangentScanReport {
        center: x.base,
        r0,
        lambda,
        scales,
        entries,
        floor_reached,
        config: *cfg,
    })
}

/// Hypotheses that flatness at scale `r` and closeness to some model at
/// `r/λ` force flatness at `r/λ`.
pub const FLAT_EPS_LIMIT: f64 = 1.0 / 24.0;
pub const FLAT_FACTOR: f64 = 25.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatPropagationReport {
    pub r: f64,
    pub lambda: f64,
    pub eps: f64,
    pub at_r: ModelEstimate,
    pub best_at_r_over_lambda: ModelEstimate,
    pub line_at_r_over_lambda: ModelEstimate,
    /// `25 ε / λ`.
    pub bound: f64,
    pub passes: bool,
}

pub fn flat_propagation_check(
    x: &PointedMMS,
    point: usize,
    r: f64,
    lambda: f64,
    eps: f64,
    cfg: &ScanConfig,
) -> Result<FlatPropagationReport> {
    if !(eps > 0.0 && eps < FLAT_EPS_LIMIT) {
        return Err(Error::HypothesisUnmet(format!("eps = {eps} is not in (0, 1/24)")));
    }
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::arg("lambda must be at least 1"));
    }
    let p = PointedMMS::new(x.space.clone(), point)?;
    let at_r = model_distance(&rescale(&p, r)?, ModelKind::R, cfg)?;
    if at_r.estimate.upper >= eps {
        return Err(Error::HypothesisUnmet(format!(
            "distance to the line at r is only known to be below {}, not below eps = {eps}",
            at_r.estimate.upper
        )));
    }
    let fine = rescale(&p, r / lambda)?;
    let prep = prepare(&fine, cfg)?;
    let all = [ModelKind::R, ModelKind::S, ModelKind::T]
        .iter()
        .map(|&k| distance_prepared(&prep, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let best = all
        .iter()
        .min_by(|a, b| a.estimate.upper.total_cmp(&b.estimate.upper))
        .expect("three models")
        .clone();
    if best.estimate.upper >= eps / lambda {
        return Err(Error::HypothesisUnmet(format!(
            "no model is known to be within eps/lambda = {} at r/lambda (best {})",
            eps / lambda,
            best.estimate.upper
        )));
    }
    let line = all[0].clone();
    let bound = FLAT_FACTOR * eps / lambda;
    Ok(FlatPropagationReport {
        r,
        lambda,
        eps,
        passes: line.estimate.upper < bound,
        at_r,
        best_at_r_over_lambda: best,
        line_at_r_over_lambda: line,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityEntry {
    pub lambda: f64,
    pub lambda_next: f64,
    /// Cross distance between a point and its copy in the gluing.
    pub slack: f64,
    pub upper: f64,
    /// `K = 2 L μ(B(x, L))` at the scale where `L · slack · μ(B(x, L))` drops below `1/L`.
    pub k: f64,
    /// The `F_x` value that bound guarantees.
    pub predicted: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub entries: Vec<ContinuityEntry>,
    pub all_hold: bool,
}

/// Glues `λX` to `λ'X` along the identity for consecutive scale factors and
/// compares the result with the Lipschitz bound of that gluing.
pub fn scale_continuity_check(x: &PointedMMS, lambdas: &[f64], cfg: &ScanConfig) -> Result<ContinuityReport> {
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::arg("scale factors must be positive"));
    }
    let iterations = cfg.fx_iterations;
    let tol = 0.5f64.powi(iterations as i32) + 1e-12;
    let mut entries = Vec::new();
    for w in lambdas.windows(2) {
        let (a, b) = (w[0], w[1]);
        let xa = PointedMMS::new(scale_space(&x.space, a)?, x.base)?;
        let xb = PointedMMS::new(scale_space(&x.space, b)?, x.base)?;
        let mut corr = Correspondence {
            pairs: (0..x.space.n()).map(|i| (i, i)).collect(),
            slack: 0.0,
        };
        corr.slack = (2.0 * (a - b).abs()).max(corr.minimal_pointed_slack(&xa, &xb));
        let upper = glued_fx(&xa, &xb, &corr, 0.5, iterations)?.unwrap_or(0.5);

        let small = a.min(b);
        let mass = |l: f64| ball_measure(&x.space, &Ball::open(x.base, l / small));
        let bound_holds = |eps: f64| -> Result<bool> { Ok((1.0 / eps) * corr.slack * mass(1.0 / eps)? < eps) };
        let predicted = if !bound_holds(0.5)? {
            0.5
        } else {
            let (mut lo, mut hi) = (0.0, 0.5);
            for _ in 0..iterations {
                let mid = 0.5 * (lo + hi);
                if bound_holds(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let l = 1.0 / predicted;
        entries.push(ContinuityEntry {
            lambda: a,
            lambda_next: b,
            slack: corr.slack,
            upper,
            k: 2.0 * l * mass(l)?,
            predicted,
            holds: upper <= predicted + tol,
        });
    }
    Ok(ContinuityReport {
        all_hold: entries.iter().all(|e| e.holds),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::make_circle;

    fn quick() -> ScanConfig {
        ScanConfig {
            golden_steps: 6,
            max_points: 160,
            ..ScanConfig::default()
        }
    }

    #[test]
    fn window_and_coarsen_keep_the_base() {
        let g = make_r_grid(0.01, 10.0).unwrap();
        let w = window(&g, 1.0).unwrap();
        assert_eq!(w.space.n(), 201);
        let (c, delta) = coarsen_to(&w, 60).unwrap();
        assert!(c.space.n() <= 60);
        assert!(delta > 0.0);
        assert_eq!(c.space.d(c.base, c.base), 0.0);
        assert!((c.space.total_mass() - w.space.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn dyadic_coarsening_is_dyadic() {
        let s = make_s(STruncationSpec { m: -4, n: 2 }).unwrap();
        let c = coarsen(&s, 0.25).unwrap();
        let direct = make_s(STruncationSpec { m: -2, n: 2 }).unwrap();
        assert_eq!(c.space.n(), direct.space.n());
        for i in 0..c.space.n() {
            assert!((c.space.weight(i) - direct.space.weight(i)).abs() < 1e-12);
            for j in 0..c.space.n() {
                assert!((c.space.d(i, j) - direct.space.d(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn models_match_themselves() {
        let g = rescale(&make_r_grid(0.02, 8.0).unwrap(), 1.0).unwrap();
        let e = model_distance(&g, ModelKind::R, &quick()).unwrap();
        assert!(e.estimate.upper < 1e-6, "{e:?}");
        let s = rescale(&make_s(STruncationSpec { m: -6, n: 4 }).unwrap(), 1.0).unwrap();
        let e = model_distance(&s, ModelKind::S, &quick()).unwrap();
        assert!(e.estimate.upper < 0.125, "{e:?}");
        let e = model_distance(&s, ModelKind::R, &quick()).unwrap();
        assert!(e.estimate.lower > 0.125, "{e:?}");
    }

    #[test]
    fn single_point_is_far_from_everything() {
        let one = crate::mms_core::FiniteMMS::from_table(vec![vec![0.0]], vec![1e-6]).unwrap();
        let p = PointedMMS::new(one, 0).unwrap();
        for kind in [ModelKind::R, ModelKind::S, ModelKind::T] {
            let e = model_distance(&p, kind, &quick()).unwrap();
            assert!(e.estimate.lower >= 0.4, "{kind:?} {e:?}");
        }
    }

    #[test]
    fn scale_continuity_on_grid_and_dyadic() {
        let g = make_r_grid(0.05, 2.0).unwrap();
        let rep = scale_continuity_check(&g, &[1.0, 1.0, 1.01], &ScanConfig::default()).unwrap();
        assert!(rep.all_hold, "{rep:?}");
        assert!(rep.entries[0].upper < 1e-6);
        let s = make_s(STruncationSpec { m: -3, n: 1 }).unwrap();
        let rep = scale_continuity_check(&s, &[1.0, 1.01], &ScanConfig::default()).unwrap();
        assert!(rep.all_hold, "{rep:?}");
    }

    #[test]
    fn flat_propagation() {
        let g = make_r_grid(0.01, 20.0).unwrap();
        let rep = flat_propagation_check(&g, g.base, 1.0, 2.0, 0.02, &quick()).unwrap();
        assert!(rep.passes, "{rep:?}");
        let s = make_s(STruncationSpec { m: -8, n: 3 }).unwrap();
        assert!(matches!(
            flat_propagation_check(&s, 0, 1.0, 2.0, 0.02, &quick()),
            Err(Error::HypothesisUnmet(_))
        ));
        assert!(matches!(
            flat_propagation_check(&g, g.base, 1.0, 2.0, 0.05, &quick()),
            Err(Error::HypothesisUnmet(_))
        ));
        let c = make_circle(256, 2.0).unwrap();
        let rep = flat_propagation_check(&c, 0, 0.125, 2.0, 0.02, &quick()).unwrap();
        assert!(rep.passes, "{rep:?}");
    }
}
