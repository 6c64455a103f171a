//! Geometric measurements: uniformity defect, covering and doubling numbers,
//! Hausdorff estimates, separation profiles, embedding stress and the
//! Heisenberg dilation checks.

mod cover;
mod heisenberg;
mod separation;
mod stress;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::{FiniteMMS, Metric, TIE_TOL};

pub use cover::{covering_number, doubling_constant, CoverReport, DoublingReport};
pub use heisenberg::{
    dilation_identity_sides, heisenberg_growth_constant, heisenberg_identity_check, GrowthReport, IdentityReport,
};
pub(crate) use separation::mst;
pub use separation::{separation_profile, SeparationEntry, SeparationProfile};
pub use stress::{lp_embed_stress, stress_of, Norm, StressResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub max_defect: f64,
    pub worst_center: usize,
    pub worst_radius: f64,
    pub worst_measure: f64,
    pub centers: usize,
    pub radii: usize,
}

/// Closed-ball masses at `center` for every radius.
pub fn ball_masses(x: &FiniteMMS, center: usize, radii: &[f64]) -> Vec<f64> {
    let mut pairs: Vec<(f64, f64)> = (0..x.n()).map(|j| (x.d(center, j), x.weight(j))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = Vec::with_capacity(pairs.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for p in &pairs {
        acc += p.1;
        prefix.push(acc);
    }
    radii
        .iter()
        .map(|&r| prefix[pairs.partition_point(|p| p.0 <= r + TIE_TOL)])
        .collect()
}

/// `max |μ(C(x,r)) − r|` over the given centres and radii.
pub fn uniformity_defect_at(x: &FiniteMMS, centers: &[usize], radii: &[f64]) -> Result<UniformityReport> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg("radii must be positive"));
    }
    if centers.is_empty() {
        return Err(Error::arg("no centres"));
    }
    for &c in centers {
        x.check_index(c)?;
    }
    let per_center = |c: &usize| {
        let masses = ball_masses(x, *c, radii);
        radii
            .iter()
            .zip(masses)
            .map(|(&r, m)| ((m - r).abs(), *c, r, m))
            .fold((f64::NEG_INFINITY, 0, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = {
        use rayon::prelude::*;
        centers.par_iter().map(per_center).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = centers.iter().map(per_center).collect();
    let worst = rows
        .into_iter()
        .fold((f64::NEG_INFINITY, 0, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(UniformityReport {
        max_defect: worst.0,
        worst_center: worst.1,
        worst_radius: worst.2,
        worst_measure: worst.3,
        centers: centers.len(),
        radii: radii.len(),
    })
}

/// Uniformity defect over every point of the space.
pub fn uniformity_defect(x: &FiniteMMS, radii: &[f64]) -> Result<UniformityReport> {
    let centers: Vec<usize> = (0..x.n()).collect();
    uniformity_defect_at(x, &centers, radii)
}

/// At most `k` indices spread evenly over `0..n`.
pub fn stride_sample(n: usize, k: usize) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    (0..k).map(|i| i * n / k).collect()
}

/// Dyadic radii `2^j` with `lo ≤ 2^j ≤ hi`.
pub fn dyadic_radii(lo: f64, hi: f64) -> Vec<f64> {
    let mut j = lo.log2().ceil() as i32;
    let mut out = Vec::new();
    while 2f64.powi(j) <= hi * (1.0 + 1e-12) {
        out.push(2f64.powi(j));
        j += 1;
    }
    out
}

/// Greedy cover by pieces of diameter at most `δ`, each grown nearest-first
/// around the first unassigned point; returns `Σ diam` of the pieces.
pub fn hausdorff_upper(x: &FiniteMMS, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::arg("delta must be positive"));
    }
    let n = x.n();
    let mut assigned = vec![false; n];
    let mut total = 0.0;
    for c in 0..n {
        if assigned[c] {
            continue;
        }
        let mut near: Vec<usize> = (0..n)
            .filter(|&j| j != c && !assigned[j] && x.d(c, j) <= delta + TIE_TOL)
            .collect();
        near.sort_by(|&a, &b| x.d(c, a).total_cmp(&x.d(c, b)).then(a.cmp(&b)));
        let mut members = vec![c];
        let mut diam = 0.0f64;
        for j in near {
            let far = members.iter().map(|&i| x.d(i, j)).fold(0.0f64, f64::max);
            if far <= delta + TIE_TOL {
                members.push(j);
                diam = diam.max(far);
            }
        }
        for &i in &members {
            assigned[i] = true;
        }
        total += diam.min(delta);
    }
    Ok(total)
}

/// Length of the image of `subset` under the 1-Lipschitz map `s ↦ Σ 2^i s_i`,
/// each point standing for its cylinder `[pos, pos + 2^m)`.
pub fn lip_projection_lower(x: &FiniteMMS, subset: Option<&[usize]>) -> Result<f64> {
    let Metric::Dyadic { codes, unit } = x.metric() else {
        return Err(Error::WrongSpaceKind);
    };
    let unit = unit * x.scale();
    let mut image: Vec<u64> = match subset {
        Some(s) => {
            for &i in s {
                x.check_index(i)?;
            }
            s.iter().map(|&i| codes[i]).collect()
        }
        None => codes.clone(),
    };
    image.sort_unstable();
    image.dedup();
    Ok(image.len() as f64 * unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms_core::{ball_points, Ball};
    use crate::model_spaces::{make_r_grid, make_s, make_star_sn, STruncationSpec};

    #[test]
    fn grid_defect_at_most_h() {
        let g = make_r_grid(0.01, 5.0).unwrap();
        let centers: Vec<usize> = (g.base - 100..=g.base + 100).collect();
        let rep = uniformity_defect_at(&g.space, &centers, &[0.1, 0.5, 1.0, 1.37, 2.0]).unwrap();
        assert!(rep.max_defect <= 0.01 + 1e-12, "{rep:?}");
    }

    #[test]
    fn star_is_not_uniform() {
        let s = make_star_sn(4).unwrap();
        let rep = uniformity_defect(&s.space, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(rep.max_defect >= 1.0);
    }

    #[test]
    fn projection_of_full_dyadic_space() {
        let s = make_s(STruncationSpec { m: 0, n: 5 }).unwrap().space;
        assert_eq!(lip_projection_lower(&s, None).unwrap(), 64.0);
        let ball = ball_points(&s, &Ball::closed(0, 8.0)).unwrap();
        let v = lip_projection_lower(&s, Some(&ball)).unwrap();
        assert!((v - 8.0).abs() <= 1.0);
        assert_eq!(lip_projection_lower(&s, Some(&[])).unwrap(), 0.0);
        let g = make_r_grid(0.5, 2.0).unwrap().space;
        assert_eq!(lip_projection_lower(&g, None), Err(Error::WrongSpaceKind));
    }

    #[test]
    fn hausdorff_estimates() {
        let one = FiniteMMS::from_table(vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(hausdorff_upper(&one, 0.5).unwrap(), 0.0);
        let s = make_s(STruncationSpec { m: 0, n: 6 }).unwrap().space;
        for j in 1..5 {
            assert!(hausdorff_upper(&s, 2f64.powi(j)).unwrap() <= 128.0);
        }
        let g = make_r_grid(0.01, 0.5).unwrap().space;
        let delta = 0.1;
        assert!(hausdorff_upper(&g, delta).unwrap() <= 1.0 + 2.0 * delta);
    }
}
