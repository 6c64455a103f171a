use serde::{Deserialize, Serialize};

use super::{find_pairs_with, PairSearch};
use crate::error::{Error, Result};
use crate::geoprobe::{ball_masses, dyadic_radii, stride_sample};
use crate::mms_core::{FiniteMMS, Metric, TIE_TOL};

/// Distinct dyadic pair scales needed before calling a space `SLike`.
pub const SLIKE_MIN_SCALES: usize = 3;
/// Centres sampled for the uniformity gate and the ball-connectivity test.
pub const CLASSIFY_CENTERS: usize = 16;
/// Centres used as the first point of candidate pairs.
pub const PAIR_ANCHORS: usize = 4;
/// Largest neighbourhood scanned around a pair anchor.
pub const PAIR_BUDGET: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    RLike,
    TLike { delta: f64 },
    SLike,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub delta_min: Option<f64>,
    /// Component counts of the whole space; computed only when no pair turns up.
    pub epsilon_connectivity: Option<Vec<(f64, usize)>>,
    pub pair_count: usize,
    pub pair_scales: Vec<i32>,
    pub uniformity_defect: f64,
    /// Fitted `c` in `μ(C(x,r)) ≈ c·r`.
    pub density: f64,
    pub reference: usize,
    pub radius: f64,
    pub pair_search_radius: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub floor: f64,
    pub tol: f64,
    pub evidence: Evidence,
}

/// Four times the smallest positive distance.
pub fn default_floor(x: &FiniteMMS) -> f64 {
    4.0 * x.min_positive_distance().unwrap_or(0.0)
}

/// Four times the largest point weight.
pub fn default_tol(x: &FiniteMMS) -> f64 {
    4.0 * x.weights().iter().cloned().fold(0.0, f64::max)
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of `pts` under edges `d < limit` (or `d ≤ limit` when `inclusive`).
fn components_within(x: &FiniteMMS, pts: &[usize], limit: f64, inclusive: bool) -> Vec<Vec<usize>> {
    let joined = |d: f64| if inclusive { d <= limit + TIE_TOL } else { d < limit - TIE_TOL };
    let m = pts.len();
    let mut dsu = Dsu((0..m).collect());
    if let Metric::Line(coords) = x.metric() {
        // On a line only consecutive points matter.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| coords[pts[i]].total_cmp(&coords[pts[j]]));
        for w in order.windows(2) {
            if joined(x.d(pts[w[0]], pts[w[1]])) {
                dsu.union(w[0], w[1]);
            }
        }
    } else {
        for i in 0..m {
            for j in (i + 1)..m {
                if joined(x.d(pts[i], pts[j])) {
                    dsu.union(i, j);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..m {
        let r = dsu.find(i);
        groups.entry(r).or_default().push(pts[i]);
    }
    let mut out: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

/// Connected components of the graph joining points at distance `< ε`.
pub fn epsilon_components(x: &FiniteMMS, eps: f64) -> Result<Vec<Vec<usize>>> {
    if !(eps > 0.0) {
        return Err(Error::arg("epsilon must be positive"));
    }
    let all: Vec<usize> = (0..x.n()).collect();
    Ok(components_within(x, &all, eps, false))
}

fn farthest(x: &FiniteMMS, from: usize) -> (usize, f64) {
    (0..x.n())
        .map(|j| (j, x.d(from, j)))
        .fold((from, 0.0), |a, b| if b.1 > a.1 { b } else { a })
}

/// A point of near-minimal eccentricity, found from a double sweep, and its eccentricity.
fn approximate_centre(x: &FiniteMMS) -> (usize, f64) {
    let (u, _) = farthest(x, 0);
    let (v, _) = farthest(x, u);
    let c = (0..x.n())
        .min_by(|&i, &j| {
            let ei = x.d(i, u).max(x.d(i, v));
            let ej = x.d(j, u).max(x.d(j, v));
            ei.total_cmp(&ej).then(i.cmp(&j))
        })
        .expect("non-empty space");
    (c, farthest(x, c).1)
}

fn unknown(floor: f64, tol: f64, mut evidence: Evidence, note: &str) -> ClassificationResult {
    evidence.notes.push(note.to_string());
    ClassificationResult {
        verdict: Verdict::Unknown,
        floor,
        tol,
        evidence,
    }
}

/// Decides which model a sampled uniform space looks like at scales above `floor`.
///
/// The sample must first pass a uniformity gate: closed-ball masses at core
/// centres must stay within `tol` of `c·r` for one fitted constant `c`.
pub fn classify_uniform(x: &FiniteMMS, floor: f64, tol: f64) -> Result<ClassificationResult> {
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(Error::arg("floor must be positive"));
    }
    if !(tol >= 0.0) {
        return Err(Error::arg("tol must be non-negative"));
    }
    let mut ev = Evidence::default();
    if x.n() < 2 {
        return Ok(unknown(floor, tol, ev, "a single point carries no scale information"));
    }
    let (reference, radius) = approximate_centre(x);
    ev.reference = reference;
    ev.radius = radius;

    let core: Vec<usize> = (0..x.n())
        .filter(|&p| p != reference && x.d(reference, p) <= radius / 2.0 + TIE_TOL)
        .collect();
    let mut centres = vec![reference];
    centres.extend(stride_sample(core.len(), CLASSIFY_CENTERS - 1).into_iter().map(|k| core[k]));

    let radii = dyadic_radii(floor, radius / 4.0);
    let Some(&r_top) = radii.last() else {
        return Ok(unknown(floor, tol, ev, "no dyadic radius between the floor and a quarter of the radius"));
    };
    let density = ball_masses(x, reference, &[r_top])[0] / r_top;
    ev.density = density;
    let defect_at = |&c: &usize| {
        ball_masses(x, c, &radii)
            .iter()
            .zip(&radii)
            .map(|(m, r)| (m - density * r).abs())
            .fold(0.0, f64::max)
    };
    #[cfg(feature = "parallel")]
    let defect = {
        use rayon::prelude::*;
        centres.par_iter().map(defect_at).reduce(|| 0.0, f64::max)
    };
    #[cfg(not(feature = "parallel"))]
    let defect = centres.iter().map(defect_at).fold(0.0, f64::max);
    ev.uniformity_defect = defect;
    if defect > tol {
        return Ok(unknown(floor, tol, ev, "uniformity gate failed"));
    }

    let anchors: Vec<usize> = centres.iter().take(PAIR_ANCHORS).copied().collect();
    let mut max_d = radius / 4.0;
    let within = |r: f64| (0..x.n()).filter(|&j| x.d(reference, j) < r).count();
    while max_d / 2.0 > floor && within(2.0 * max_d) > PAIR_BUDGET {
        max_d /= 2.0;
    }
    if max_d < radius / 4.0 {
        ev.notes.push(format!("pair search limited to d ≤ {max_d}"));
    }
    ev.pair_search_radius = max_d;
    let pairs = find_pairs_with(
        x,
        &PairSearch {
            min_d: floor,
            max_d,
            anchors: Some(anchors),
        },
    )?;
    ev.pair_count = pairs.len();
    let mut scales: Vec<i32> = pairs.iter().map(|p| p.d.log2().round() as i32).collect();
    scales.sort_unstable();
    scales.dedup();
    ev.pair_scales = scales;

    if pairs.is_empty() {
        let all: Vec<usize> = (0..x.n()).collect();
        let count = components_within(x, &all, floor, true).len();
        ev.epsilon_connectivity = Some(vec![(floor, count)]);
        if count == 1 {
            return Ok(ClassificationResult {
                verdict: Verdict::RLike,
                floor,
                tol,
                evidence: ev,
            });
        }
        return Ok(unknown(floor, tol, ev, "disconnected above the floor yet no pair found"));
    }

    let delta = pairs[0].d;
    ev.delta_min = Some(delta);
    let balls_connected = centres.iter().all(|&c| {
        let ball: Vec<usize> = (0..x.n()).filter(|&j| x.d(c, j) < delta - TIE_TOL).collect();
        components_within(x, &ball, floor, false).len() == 1
    });
    if delta > floor + TIE_TOL && balls_connected {
        return Ok(ClassificationResult {
            verdict: Verdict::TLike { delta },
            floor,
            tol,
            evidence: ev,
        });
    }
    if ev.pair_scales.len() >= SLIKE_MIN_SCALES {
        return Ok(ClassificationResult {
            verdict: Verdict::SLike,
            floor,
            tol,
            evidence: ev,
        });
    }
    Ok(unknown(floor, tol, ev, "pairs found at too few scales"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::{make_r_grid, make_s, make_t, scale_space, STruncationSpec, TTruncationSpec};

    fn classify(x: &FiniteMMS) -> ClassificationResult {
        classify_uniform(x, default_floor(x), default_tol(x)).unwrap()
    }

    #[test]
    fn components() {
        let g = make_r_grid(0.1, 1.0).unwrap().space;
        assert_eq!(epsilon_components(&g, 0.2).unwrap().len(), 1);
        let s = make_s(STruncationSpec { m: 0, n: 3 }).unwrap().space;
        assert_eq!(epsilon_components(&s, 0.5).unwrap().len(), 16);
        let t = make_t(TTruncationSpec { circle_points: 16, m: 0, n_levels: 2 }).unwrap().space;
        let parts = epsilon_components(&t, 0.5).unwrap();
        assert_eq!(parts.len(), 4);
        assert!(parts.iter().all(|p| p.len() == 16));
    }

    #[test]
    fn three_models() {
        let g = make_r_grid(0.05, 5.0).unwrap().space;
        assert_eq!(classify(&g).verdict, Verdict::RLike);
        let t = make_t(TTruncationSpec { circle_points: 64, m: 0, n_levels: 4 }).unwrap().space;
        let r = classify_uniform(&t, 4.0 / 64.0, default_tol(&t)).unwrap();
        assert_eq!(r.verdict, Verdict::TLike { delta: 1.0 }, "{r:?}");
        let s = make_s(STruncationSpec { m: -6, n: 4 }).unwrap().space;
        let r = classify(&s);
        assert_eq!(r.verdict, Verdict::SLike, "{r:?}");
    }

    #[test]
    fn scaled_copies_agree() {
        let t = make_t(TTruncationSpec { circle_points: 32, m: 0, n_levels: 3 }).unwrap().space;
        let t3 = scale_space(&t, 3.0).unwrap();
        assert_eq!(classify(&t3).verdict, Verdict::TLike { delta: 3.0 });
    }

    #[test]
    fn non_uniform_input_is_unknown() {
        let x = FiniteMMS::from_table(
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 4.5], vec![5.0, 4.5, 0.0]],
            vec![1.0, 5.0, 0.1],
        )
        .unwrap();
        let r = classify_uniform(&x, 0.5, 0.1).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
    }
}
