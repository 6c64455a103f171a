//! Discretised model spaces: the dyadic space, circle-times-binary space, the
//! weighted line, star and spider configurations, and Heisenberg samples.

pub mod heisenberg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::{FiniteMMS, Metric, PointedMMS};

pub use heisenberg::{
    heisenberg_dilate, heisenberg_inv, heisenberg_mul, koranyi_norm, make_heisenberg_sample,
    HeisenbergPoint,
};

pub const MAX_LOG2_POINTS: u32 = 20;

/// Binary strings indexed by `m..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct STruncationSpec {
    pub m: i32,
    pub n: i32,
}

impl STruncationSpec {
    pub fn new(m: i32, n: i32) -> Result<Self> {
        if m > n {
            return Err(Error::arg(format!("m = {m} exceeds n = {n}")));
        }
        if (n - m) as u32 > MAX_LOG2_POINTS {
            return Err(Error::SizeGuard {
                what: "dyadic truncation n - m",
                got: (n - m) as u64,
                limit: MAX_LOG2_POINTS as u64,
            });
        }
        Ok(STruncationSpec { m, n })
    }

    pub fn bits(&self) -> u32 {
        (self.n - self.m + 1) as u32
    }
}

/// Circle of circumference 2 sampled at `circle_points` nodes, times binary
/// strings on the indices `m..m + n_levels`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TTruncationSpec {
    pub circle_points: u32,
    pub m: u32,
    pub n_levels: u32,
}

impl TTruncationSpec {
    pub fn new(circle_points: u32, m: u32, n_levels: u32) -> Result<Self> {
        if circle_points == 0 || !circle_points.is_multiple_of(2) {
            return Err(Error::arg("circle_points must be even and positive"));
        }
        if n_levels == 0 {
            return Err(Error::arg("n_levels must be positive"));
        }
        let total = (circle_points as u64).checked_shl(n_levels).unwrap_or(u64::MAX);
        if n_levels > MAX_LOG2_POINTS || total > 1 << MAX_LOG2_POINTS {
            return Err(Error::SizeGuard {
                what: "circle_points * 2^n_levels",
                got: total,
                limit: 1 << MAX_LOG2_POINTS,
            });
        }
        if m + n_levels > 52 {
            return Err(Error::arg("binary indices beyond 52 lose exactness"));
        }
        Ok(TTruncationSpec {
            circle_points,
            m,
            n_levels,
        })
    }
}

/// The dyadic space: distance `Σ 2^i |s_i − t_i|`, each point a level-`m`
/// cylinder of mass `2^m`. Point `k` is the string whose bit `j` is index `m + j`.
pub fn make_s(spec: STruncationSpec) -> Result<PointedMMS> {
    let spec = STruncationSpec::new(spec.m, spec.n)?;
    let count = 1usize << spec.bits();
    let unit = 2f64.powi(spec.m);
    let space = FiniteMMS::from_metric(
        Metric::Dyadic {
            codes: (0..count as u64).collect(),
            unit,
        },
        vec![unit; count],
    )?;
    PointedMMS::new(space, 0)
}

/// The circle-times-binary space. Point `code · circle_points + node`
/// is the circle node `node` (position `2·node/circle_points`) with binary string `code`.
pub fn make_t(spec: TTruncationSpec) -> Result<PointedMMS> {
    let spec = TTruncationSpec::new(spec.circle_points, spec.m, spec.n_levels)?;
    let cp = spec.circle_points;
    let codes_n = 1u64 << spec.n_levels;
    let mut nodes = Vec::with_capacity((codes_n * cp as u64) as usize);
    let mut codes = Vec::with_capacity(nodes.capacity());
    for c in 0..codes_n {
        for k in 0..cp {
            nodes.push(k);
            codes.push(c);
        }
    }
    let n = nodes.len();
    let space = FiniteMMS::from_metric(
        Metric::TorusDyadic {
            nodes,
            codes,
            circle_points: cp,
            arc_step: 2.0 / cp as f64,
            unit: 2f64.powi(spec.m as i32),
        },
        vec![1.0 / cp as f64; n],
    )?;
    PointedMMS::new(space, 0)
}

/// A single circle of the given circumference with total mass half its length.
pub fn make_circle(circle_points: u32, circumference: f64) -> Result<PointedMMS> {
    if circle_points < 2 || !circle_points.is_multiple_of(2) {
        return Err(Error::arg("circle_points must be even and at least 2"));
    }
    if circle_points > 1 << MAX_LOG2_POINTS {
        return Err(Error::SizeGuard {
            what: "circle_points",
            got: circle_points as u64,
            limit: 1 << MAX_LOG2_POINTS,
        });
    }
    if !(circumference > 0.0 && circumference.is_finite()) {
        return Err(Error::arg("circumference must be positive"));
    }
    let step = circumference / circle_points as f64;
    let space = FiniteMMS::from_metric(
        Metric::TorusDyadic {
            nodes: (0..circle_points).collect(),
            codes: vec![0; circle_points as usize],
            circle_points,
            arc_step: step,
            unit: 1.0,
        },
        vec![step / 2.0; circle_points as usize],
    )?;
    PointedMMS::new(space, 0)
}

/// Grid `−extent..extent` with step `h` and weights `h/2`; the base sits at 0.
pub fn make_r_grid(h: f64, extent: f64) -> Result<PointedMMS> {
    if !(h > 0.0 && extent > 0.0 && h.is_finite() && extent.is_finite()) {
        return Err(Error::arg("h and extent must be positive"));
    }
    let ratio = extent / h;
    if ratio > (1u64 << MAX_LOG2_POINTS) as f64 {
        return Err(Error::SizeGuard {
            what: "extent / h",
            got: ratio.ceil() as u64,
            limit: 1 << MAX_LOG2_POINTS,
        });
    }
    let k = (ratio + 1e-9).floor() as i64;
    let coords: Vec<f64> = (-k..=k).map(|i| i as f64 * h).collect();
    let n = coords.len();
    let space = FiniteMMS::from_metric(Metric::Line(coords), vec![h / 2.0; n])?;
    PointedMMS::new(space, k as usize)
}

pub const MAX_STAR_ARMS: u32 = 30;

/// `ρ(0,i) = 2^i`, `ρ(i,j) = 2^i + 2^j`, unit weights, base `s₀`.
pub fn make_star_sn(n: u32) -> Result<PointedMMS> {
    if n == 0 || n > MAX_STAR_ARMS {
        return Err(Error::arg(format!("star needs 1..={MAX_STAR_ARMS} arms")));
    }
    let k = n as usize + 1;
    let leg = |i: usize| if i == 0 { 0.0 } else { 2f64.powi(i as i32) };
    let mut t = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                t[i * k + j] = leg(i) + leg(j);
            }
        }
    }
    let space = FiniteMMS::from_flat_table_unchecked(k, t, vec![1.0; k])?;
    space.check_metric()?;
    PointedMMS::new(space, 0)
}

/// `s₀` at distance 2 from each midpoint `m_i`, midpoints mutually 4 apart.
pub fn make_spider_midpoints(n: u32) -> Result<FiniteMMS> {
    if n == 0 || n > MAX_STAR_ARMS {
        return Err(Error::arg(format!("spider needs 1..={MAX_STAR_ARMS} legs")));
    }
    let k = n as usize + 1;
    let mut t = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            t[i * k + j] = match (i, j) {
                _ if i == j => 0.0,
                (0, _) | (_, 0) => 2.0,
                _ => 4.0,
            };
        }
    }
    let space = FiniteMMS::from_flat_table_unchecked(k, t, vec![1.0; k])?;
    space.check_metric()?;
    Ok(space)
}

/// `λX`: distances multiplied by `λ`, weights unchanged.
pub fn scale_space(x: &FiniteMMS, lambda: f64) -> Result<FiniteMMS> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg("scale factor must be positive"));
    }
    Ok(x.scaled(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms_core::{ball_measure, ball_points, Ball};

    #[test]
    fn s_small_example() {
        let s = make_s(STruncationSpec { m: 0, n: 1 }).unwrap().space;
        assert_eq!(s.n(), 4);
        assert_eq!(s.d(0, 1), 1.0);
        assert_eq!(s.d(0, 2), 2.0);
        assert_eq!(s.d(0, 3), 3.0);
        assert!(s.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn s_closed_ball_radius_three() {
        let s = make_s(STruncationSpec { m: 0, n: 4 }).unwrap().space;
        assert_eq!(ball_points(&s, &Ball::closed(0, 3.0)).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn s_closed_ball_includes_sphere() {
        let s = make_s(STruncationSpec { m: 0, n: 8 }).unwrap().space;
        assert_eq!(ball_measure(&s, &Ball::closed(0, 16.0)).unwrap(), 17.0);
    }

    #[test]
    fn s_size_guard() {
        assert!(matches!(
            make_s(STruncationSpec { m: -11, n: 10 }),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn t_flip_cost_and_circle_diameter() {
        let t = make_t(TTruncationSpec { circle_points: 8, m: 0, n_levels: 2 }).unwrap().space;
        assert_eq!(t.d(0, 8), 1.0);
        assert_eq!(t.d(0, 16), 2.0);
        for k in 0..8 {
            assert!(t.d(0, k) <= 1.0);
        }
        assert_eq!(t.d(0, 4), 1.0);
    }

    #[test]
    fn t_one_level_unit_ball_mass() {
        let t = make_t(TTruncationSpec { circle_points: 8, m: 0, n_levels: 1 }).unwrap().space;
        let m = ball_measure(&t, &Ball::closed(0, 1.0)).unwrap();
        assert!((m - 1.0).abs() <= 2.0 / 8.0 + 1e-12, "{m}");
    }

    #[test]
    fn r_grid_unit_ball() {
        let r = make_r_grid(0.01, 10.0).unwrap();
        let m = ball_measure(&r.space, &Ball::closed(r.base, 1.0)).unwrap();
        assert!((m - 1.0).abs() <= 0.01 + 1e-12);
    }

    #[test]
    fn star_three() {
        let s = make_star_sn(3).unwrap().space;
        assert_eq!(s.d(0, 1), 2.0);
        assert_eq!(s.d(1, 2), 6.0);
        assert_eq!(s.d(1, 3), 10.0);
        assert_eq!(s.d(2, 3), 12.0);
        assert_eq!(ball_points(&s, &Ball::open(0, 2.0)).unwrap(), vec![0]);
    }

    #[test]
    fn spider_two_is_a_path() {
        let s = make_spider_midpoints(2).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.d(1, 2), s.d(1, 0) + s.d(0, 2));
    }

    #[test]
    fn scale_space_composes() {
        let s = make_s(STruncationSpec { m: 0, n: 3 }).unwrap().space;
        let a = scale_space(&scale_space(&s, 0.5).unwrap(), 4.0).unwrap();
        let b = scale_space(&s, 2.0).unwrap();
        assert_eq!(a.dense(), b.dense());
    }
}
