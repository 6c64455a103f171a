//! Two-sided estimates of the pointed distance `d*`, comparisons with the
//! uniform model spaces, and tangent scans.
//!
//! Upper bounds come from explicit gluings: every correspondence with enough
//! slack yields an ambient space, and `F_x` there bounds `d*` from above.
//! Lower bounds come from test functions whose integrals do not depend on
//! how the two spaces sit inside the ambient space.

mod lower;
mod scan;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lip_dual::{DualInstance, FX_ITERATIONS};
use crate::mms_core::{glue_pointed, Correspondence, PointedMMS};

pub use lower::{cluster_lower, dstar_lower_tent, pushforward_lower, LOWER_ITERATIONS};
pub use scan::{
    coarsen, coarsen_to, DEFAULT_MAX_POINTS, FLOOR_POINTS, flat_propagation_check, model_distance, model_distance_at,
    scale_continuity_check, tangent_scan, window, ContinuityEntry, ContinuityReport,
    FlatPropagationReport, Model, ModelEstimate, ModelKind, ScanConfig, ScanEntry,
    TangentScanReport, Verdict,
};

/// Slack on `lower ≤ upper` before it counts as a contradiction.
pub const SANDWICH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DStarEstimate {
    pub lower: f64,
    pub upper: f64,
    pub witness_corr: Correspondence,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperConfig {
    /// Random pair swaps tried after the structured candidates.
    pub search_budget: usize,
    pub fx_iterations: usize,
    pub seed: u64,
}

impl Default for UpperConfig {
    fn default() -> Self {
        UpperConfig {
            search_budget: 8,
            fx_iterations: FX_ITERATIONS,
            seed: 0,
        }
    }
}

/// Every point matched to a point of the other space at the closest
/// distance to the base; near-ties go to the candidate that distorts the
/// pairs matched so far the least.
pub fn profile_correspondence(x: &PointedMMS, y: &PointedMMS) -> Correspondence {
    let mut pairs = vec![(x.base, y.base)];
    extend_by_height(x, y, &mut pairs, false);
    extend_by_height(y, x, &mut pairs, true);
    pairs.sort_unstable();
    pairs.dedup();
    let mut c = Correspondence { pairs, slack: 0.0 };
    c.slack = c.minimal_pointed_slack(x, y);
    c
}

/// Matches every point of `a` into `b`; `flip` says the pairs are stored as `(b, a)`.
fn extend_by_height(a: &PointedMMS, b: &PointedMMS, pairs: &mut Vec<(usize, usize)>, flip: bool) {
    let ha = a.heights();
    let hb = b.heights();
    let mut ob: Vec<usize> = (0..hb.len()).collect();
    ob.sort_by(|&i, &j| hb[i].total_cmp(&hb[j]).then(i.cmp(&j)));
    let mut oa: Vec<usize> = (0..ha.len()).collect();
    oa.sort_by(|&i, &j| ha[i].total_cmp(&ha[j]).then(i.cmp(&j)));
    let tie = 1e-9 * a.space.diameter().max(b.space.diameter()).max(1.0);
    let mut matched: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(p, q)| if flip { (q, p) } else { (p, q) })
        .collect();
    for &p in &oa {
        let t = ha[p];
        let k = ob.partition_point(|&i| hb[i] < t);
        let gap = [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(|c| ob.get(c))
            .map(|&i| (hb[i] - t).abs())
            .fold(f64::INFINITY, f64::min);
        let lo = ob.partition_point(|&i| hb[i] < t - gap - tie);
        let hi = ob.partition_point(|&i| hb[i] <= t + gap + tie);
        let q = ob[lo..hi]
            .iter()
            .copied()
            .map(|q| {
                let worst = matched
                    .iter()
                    .map(|&(p2, q2)| (a.space.d(p, p2) - b.space.d(q, q2)).abs())
                    .fold(0.0f64, f64::max);
                (worst, q)
            })
            .min_by(|u, v| u.0.total_cmp(&v.0).then(u.1.cmp(&v.1)))
            .map(|(_, q)| q)
            .expect("nonempty space");
        matched.push((p, q));
        pairs.push(if flip { (q, p) } else { (p, q) });
    }
}

fn identity_correspondence(x: &PointedMMS, y: &PointedMMS) -> Option<Correspondence> {
    if x.space.n() != y.space.n() || x.base != y.base {
        return None;
    }
    let mut c = Correspondence {
        pairs: (0..x.space.n()).map(|i| (i, i)).collect(),
        slack: 0.0,
    };
    c.slack = c.minimal_pointed_slack(x, y);
    Some(c)
}

/// `F_x` on the gluing along `corr`, searched only below `ceiling`.
///
/// Returns the upper end of the final bracket, or `None` when the
/// condition already fails at the ceiling.
pub fn glued_fx(
    x: &PointedMMS,
    y: &PointedMMS,
    corr: &Correspondence,
    ceiling: f64,
    iterations: usize,
) -> Result<Option<f64>> {
    let g = glue_pointed(x, y, corr)?;
    let inst = DualInstance::new(&g.space, g.base)?;
    let mut mass = vec![0.0; g.space.n()];
    for (i, &k) in g.map_x.iter().enumerate() {
        mass[k] += x.space.weight(i);
    }
    for (j, &k) in g.map_y.iter().enumerate() {
        mass[k] -= y.space.weight(j);
    }
    let holds = |eps: f64| inst.solve(1.0 / eps, 1.0 / eps, &mass).value < eps;
    if !holds(ceiling) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, ceiling);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Best upper bound over structured and randomly perturbed correspondences.
pub fn dstar_upper_search(
    x: &PointedMMS,
    y: &PointedMMS,
    cfg: &UpperConfig,
) -> Result<(f64, Correspondence)> {
    Ok(upper_search_below(x, y, cfg, 0.5)?.unwrap_or_else(|| (0.5, Correspondence::base_only(x, y, 0.0))))
}

/// Like [`dstar_upper_search`] but only looks for values below `ceiling`.
pub(crate) fn upper_search_below(
    x: &PointedMMS,
    y: &PointedMMS,
    cfg: &UpperConfig,
    ceiling: f64,
) -> Result<Option<(f64, Correspondence)>> {
    let mut best: Option<(f64, Correspondence)> = None;
    let consider = |corr: Correspondence, best: &mut Option<(f64, Correspondence)>| -> Result<()> {
        let cap = best.as_ref().map_or(ceiling, |b| b.0);
        if let Some(v) = glued_fx(x, y, &corr, cap, cfg.fx_iterations)? {
            if best.as_ref().is_none_or(|b| v < b.0) {
                *best = Some((v, corr));
            }
        }
        Ok(())
    };
    if let Some(id) = identity_correspondence(x, y) {
        consider(id, &mut best)?;
    }
    consider(profile_correspondence(x, y), &mut best)?;
    consider(Correspondence::base_only(x, y, 0.0), &mut best)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ny = y.space.n();
    for _ in 0..cfg.search_budget {
        let Some(current) = best.as_ref() else {
            break;
        };
        let mut pairs = current.1.pairs.clone();
        let movable: Vec<usize> = (0..pairs.len()).filter(|&k| pairs[k] != (x.base, y.base)).collect();
        let Some(&k) = movable.choose(&mut rng) else {
            break;
        };
        let (p, q) = pairs[k];
        // Swap in a partner at a similar distance from the base.
        let hq = y.space.d(y.base, q);
        let near: Vec<usize> = (0..ny)
            .filter(|&j| j != q && (y.space.d(y.base, j) - hq).abs() <= hq.max(1e-12))
            .collect();
        let Some(&j) = near.choose(&mut rng) else {
            continue;
        };
        pairs[k] = (p, j);
        if rng.gen_bool(0.5) {
            pairs.push((p, q));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut c = Correspondence { pairs, slack: 0.0 };
        c.slack = c.minimal_pointed_slack(x, y);
        consider(c, &mut best)?;
    }
    Ok(best)
}

/// Upper bound from gluings, lower bound from invariant test functions.
pub fn dstar_estimate(x: &PointedMMS, y: &PointedMMS, cfg: &UpperConfig) -> Result<DStarEstimate> {
    let (upper, witness_corr) = dstar_upper_search(x, y, cfg)?;
    let lower = dstar_lower_tent(x, y)?;
    assert!(
        lower <= upper + SANDWICH_TOL,
        "certified lower bound {lower} exceeds certified upper bound {upper}"
    );
    Ok(DStarEstimate {
        lower: lower.min(upper),
        upper,
        witness_corr,
    })
}

/// `d*` estimate with the given swap budget.
pub fn dstar_upper(x: &PointedMMS, y: &PointedMMS, search_budget: usize) -> Result<DStarEstimate> {
    dstar_estimate(
        x,
        y,
        &UpperConfig {
            search_budget,
            ..UpperConfig::default()
        },
    )
}

/// Upper bound for one given correspondence.
pub fn dstar_with(x: &PointedMMS, y: &PointedMMS, corr: &Correspondence) -> Result<f64> {
    if corr.pairs.is_empty() {
        return Err(Error::InvalidCorrespondence("no pairs".into()));
    }
    Ok(glued_fx(x, y, corr, 0.5, FX_ITERATIONS)?.unwrap_or(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms_core::rescale;
    use crate::model_spaces::{make_r_grid, make_s, make_t, scale_space, STruncationSpec, TTruncationSpec};

    fn tol() -> f64 {
        0.5f64.powi(FX_ITERATIONS as i32)
    }

    #[test]
    fn identical_spaces_are_close() {
        let g = make_r_grid(0.1, 2.0).unwrap();
        let e = dstar_upper(&g, &g, 0).unwrap();
        assert!(e.upper <= tol(), "{}", e.upper);
        assert_eq!(e.lower, 0.0);
    }

    #[test]
    fn slightly_scaled_grid() {
        let g = make_r_grid(0.05, 2.0).unwrap();
        let h = PointedMMS::new(scale_space(&g.space, 1.001).unwrap(), g.base).unwrap();
        let e = dstar_upper(&g, &h, 0).unwrap();
        // The identity gluing has slack 0.002; F^{L,L} ≤ L · 0.002 · μ(B(0,L)).
        assert!(e.upper <= 0.1, "{e:?}");
        assert!(e.lower <= e.upper);
    }

    #[test]
    fn circles_against_the_line() {
        let t = make_t(TTruncationSpec { circle_points: 64, m: 0, n_levels: 3 }).unwrap();
        let t1 = rescale(&t, 1.0).unwrap();
        let r = rescale(&make_r_grid(1.0 / 32.0, 8.0).unwrap(), 1.0).unwrap();
        let e = dstar_upper(&t1, &r, 0).unwrap();
        assert!(e.upper <= 2.1);
        assert!(e.lower >= 0.25, "{e:?}");
        assert!(e.lower <= e.upper);
    }

    #[test]
    fn dyadic_against_the_line() {
        let s = rescale(&make_s(STruncationSpec { m: -5, n: 3 }).unwrap(), 1.0).unwrap();
        let r = rescale(&make_r_grid(1.0 / 32.0, 8.0).unwrap(), 1.0).unwrap();
        let lo = dstar_lower_tent(&s, &r).unwrap();
        assert!(lo >= 0.125 - 0.05, "{lo}");
        assert_eq!(dstar_lower_tent(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn mirrored_correspondences_agree() {
        let a = make_r_grid(0.25, 2.0).unwrap();
        let b = PointedMMS::new(scale_space(&a.space, 1.1).unwrap(), a.base).unwrap();
        let c = profile_correspondence(&a, &b);
        let mirrored = Correspondence {
            pairs: c.pairs.iter().map(|&(p, q)| (q, p)).collect(),
            slack: c.slack,
        };
        let ab = dstar_with(&a, &b, &c).unwrap();
        let ba = dstar_with(&b, &a, &mirrored).unwrap();
        assert!((ab - ba).abs() <= 1e-6, "{ab} {ba}");
    }
}
