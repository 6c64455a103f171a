//! The bounded-Lipschitz functionals `F^{L,r}` and `F_x` on finite spaces.
//!
//! The linear program
//! `max Σ g_i m_i` s.t. `|g_i − g_j| ≤ L d_ij`, `|g_i| ≤ min(1, L (r − d(z,i))⁺)`
//! is the dual of an uncapacitated transshipment problem on the points plus
//! a ground node (ground edges cost the caps), so it is solved as a min-cost flow.

mod flow;
pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::FiniteMMS;
use flow::FlowNet;

pub use oracle::{f_lr_oracle, ORACLE_MAX_POINTS};

/// Bisection steps for `F_x`.
pub const FX_ITERATIONS: usize = 40;

/// Largest ambient space accepted by the solver.
pub const MAX_LP_POINTS: usize = 6000;

/// Witness constraint tolerance.
pub const WITNESS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzDualProblem {
    pub space: FiniteMMS,
    pub base: usize,
    pub lipschitz: f64,
    pub radius: f64,
    pub signed_mass: Vec<f64>,
}

impl LipschitzDualProblem {
    pub fn validate(&self) -> Result<()> {
        self.space.check_index(self.base)?;
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::arg("L must be positive and finite"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::arg("r must be positive and finite"));
        }
        if self.signed_mass.len() != self.space.n() {
            return Err(Error::arg("signed mass has the wrong length"));
        }
        if self.signed_mass.iter().any(|m| !m.is_finite()) {
            return Err(Error::arg("signed mass must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    InfeasibleGuard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub value: f64,
    pub witness: Vec<f64>,
    pub status: LpStatus,
    /// Primal flow cost minus dual objective; zero certifies optimality.
    pub duality_gap: f64,
}

pub(crate) fn caps(space: &FiniteMMS, base: usize, l: f64, r: f64) -> Vec<f64> {
    (0..space.n())
        .map(|i| (l * (r - space.d(base, i)).max(0.0)).min(1.0))
        .collect()
}

/// Preprocessed ambient space: zero-distance points merged and constraints
/// implied by the triangle inequality dropped. Reusable across `(L, r)`.
pub struct DualInstance {
    n: usize,
    rep_of: Vec<usize>,
    height: Vec<f64>,
    edges: Vec<(u32, u32, f64)>,
}

impl DualInstance {
    pub fn new(space: &FiniteMMS, base: usize) -> Result<Self> {
        space.check_index(base)?;
        let n = space.n();
        if n > MAX_LP_POINTS {
            return Err(Error::SizeGuard {
                what: "LP ambient size",
                got: n as u64,
                limit: MAX_LP_POINTS as u64,
            });
        }
        let dist = space.dense();

        let mut rep_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for i in 0..n {
            if rep_of[i] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(i);
            for j in i..n {
                if rep_of[j] == usize::MAX && dist[i * n + j] <= 1e-15 {
                    rep_of[j] = id;
                }
            }
        }
        let k = reps.len();
        let dr: Vec<f64> = reps
            .iter()
            .flat_map(|&a| reps.iter().map(move |&b| (a, b)))
            .map(|(a, b)| dist[a * n + b])
            .collect();
        let height = reps.iter().map(|&a| dist[base * n + a]).collect();

        let order: Vec<Vec<u32>> = (0..k)
            .map(|i| {
                let row = &dr[i * k..(i + 1) * k];
                let mut idx: Vec<u32> = (0..k as u32).collect();
                idx.sort_by(|&a, &b| row[a as usize].total_cmp(&row[b as usize]));
                idx
            })
            .collect();
        let mut edges = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                let dij = dr[i * k + j];
                let tol = 1e-12 * dij.max(1.0);
                let implied = implied_scan(&order[i], &dr, k, i, j, dij, tol);
                if !implied {
                    edges.push((i as u32, j as u32, dij));
                }
            }
        }
        Ok(DualInstance {
            n,
            rep_of,
            height,
            edges,
        })
    }

    /// Points on a half-line at the given distances from the base; only
    /// neighbouring heights constrain each other.
    pub fn on_line(heights: &[f64]) -> Result<Self> {
        if heights.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::arg("heights must be finite and nonnegative"));
        }
        let n = heights.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| heights[a].total_cmp(&heights[b]));
        let mut rep_of = vec![0; n];
        let mut height: Vec<f64> = Vec::new();
        for &i in &order {
            match height.last() {
                Some(&h) if heights[i] - h <= 1e-15 => {}
                _ => height.push(heights[i]),
            }
            rep_of[i] = height.len() - 1;
        }
        let edges = height
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k as u32, k as u32 + 1, w[1] - w[0]))
            .collect();
        Ok(DualInstance {
            n,
            rep_of,
            height,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn solve(&self, l: f64, r: f64, signed_mass: &[f64]) -> LpResult {
        let k = self.height.len();
        let cap: Vec<f64> = self
            .height
            .iter()
            .map(|h| (l * (r - h).max(0.0)).min(1.0))
            .collect();
        let mut mass = vec![0.0; k];
        for (i, m) in signed_mass.iter().enumerate() {
            mass[self.rep_of[i]] += m;
        }
        let mut node = vec![usize::MAX; k];
        let mut active = Vec::new();
        for v in 0..k {
            if cap[v] > 0.0 {
                node[v] = active.len();
                active.push(v);
            }
        }
        let zero = || LpResult {
            value: 0.0,
            witness: vec![0.0; self.n],
            status: LpStatus::Optimal,
            duality_gap: 0.0,
        };
        if active.iter().all(|&v| mass[v] == 0.0) {
            return zero();
        }
        let ground = active.len();
        let mut net = FlowNet::new(ground + 1);
        for &(a, b, d) in &self.edges {
            let (a, b) = (a as usize, b as usize);
            if node[a] == usize::MAX || node[b] == usize::MAX {
                continue;
            }
            let c = l * d;
            if cap[a] + cap[b] <= c {
                continue;
            }
            net.add_edge(node[a], node[b], c);
        }
        let mut supply = vec![0.0; ground + 1];
        for (u, &v) in active.iter().enumerate() {
            net.add_edge(u, ground, cap[v]);
            supply[u] = mass[v];
            supply[ground] -= mass[v];
        }
        let sol = net.solve(&supply);
        let mut g_rep = vec![0.0; k];
        for (u, &v) in active.iter().enumerate() {
            g_rep[v] = (sol.potential[ground] - sol.potential[u]).clamp(-cap[v], cap[v]);
        }
        let witness: Vec<f64> = self.rep_of.iter().map(|&v| g_rep[v]).collect();
        let value: f64 = witness.iter().zip(signed_mass).map(|(g, m)| g * m).sum();
        LpResult {
            value,
            witness,
            status: if sol.converged {
                LpStatus::Optimal
            } else {
                LpStatus::InfeasibleGuard
            },
            duality_gap: sol.cost - value,
        }
    }
}

/// Looks for an intermediate point `m` with `d_im + d_mj ≤ d_ij`, scanning the
/// neighbours of `i` in order of distance.
fn implied_scan(order: &[u32], dr: &[f64], k: usize, i: usize, j: usize, dij: f64, tol: f64) -> bool {
    for &m in order.iter().skip(1) {
        let m = m as usize;
        let dim = dr[i * k + m];
        if dim >= dij {
            break;
        }
        if m != j && dim + dr[m * k + j] <= dij + tol && dr[m * k + j] > tol {
            return true;
        }
    }
    false
}

/// `F^{L,r}_z(μ, ν)` with the maximising witness.
pub fn f_lr(problem: &LipschitzDualProblem) -> Result<LpResult> {
    problem.validate()?;
    let inst = DualInstance::new(&problem.space, problem.base)?;
    Ok(inst.solve(problem.lipschitz, problem.radius, &problem.signed_mass))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FxOutcome {
    pub value: f64,
    /// Final bracket `(lo, hi)`; `P` fails at `lo` and holds at `hi`.
    pub bracket: (f64, f64),
    pub evaluations: usize,
    /// Smallest `|F^{1/ε,1/ε} − ε|` seen, flagging near-ties with the strict inequality.
    pub closest_margin: f64,
}

/// Threshold search for `inf{ε ∈ (0,1/2) : F^{1/ε,1/ε} < ε}`.
pub fn fx_search(inst: &DualInstance, signed_mass: &[f64], iterations: usize) -> FxOutcome {
    let mut evaluations = 0;
    let mut closest = f64::INFINITY;
    let mut holds = |eps: f64| {
        evaluations += 1;
        let v = inst.solve(1.0 / eps, 1.0 / eps, signed_mass).value;
        closest = closest.min((v - eps).abs());
        v < eps
    };
    if !holds(0.5) {
        return FxOutcome {
            value: 0.5,
            bracket: (0.5, 0.5),
            evaluations: 1,
            closest_margin: closest,
        };
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    FxOutcome {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
        evaluations,
        closest_margin: closest,
    }
}

/// `F_x(μ, ν)` on the ambient space `z` at `base`.
pub fn f_x(z: &FiniteMMS, base: usize, mu: &[f64], nu: &[f64]) -> Result<f64> {
    Ok(f_x_detailed(z, base, mu, nu, FX_ITERATIONS)?.value)
}

pub fn f_x_detailed(
    z: &FiniteMMS,
    base: usize,
    mu: &[f64],
    nu: &[f64],
    iterations: usize,
) -> Result<FxOutcome> {
    let n = z.n();
    if mu.len() != n || nu.len() != n {
        return Err(Error::arg("mass vectors must match the space size"));
    }
    if mu.iter().chain(nu).any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::arg("masses must be finite and nonnegative"));
    }
    let inst = DualInstance::new(z, base)?;
    let signed: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a - b).collect();
    Ok(fx_search(&inst, &signed, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points(d: f64) -> FiniteMMS {
        FiniteMMS::from_table(vec![vec![0.0, d], vec![d, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    fn problem(space: FiniteMMS, l: f64, r: f64, m: Vec<f64>) -> LipschitzDualProblem {
        LipschitzDualProblem {
            space,
            base: 0,
            lipschitz: l,
            radius: r,
            signed_mass: m,
        }
    }

    #[test]
    fn cap_saturates_at_one() {
        let p = problem(two_points(1.0), 4.0, 3.0, vec![0.0, 1.0]);
        assert!((f_lr(&p).unwrap().value - 1.0).abs() < 1e-12);
        assert!((f_lr_oracle(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_from_support() {
        let p = problem(two_points(0.9), 1.0, 1.0, vec![0.0, 1.0]);
        assert!((f_lr(&p).unwrap().value - 0.1).abs() < 1e-12);
        assert!((f_lr_oracle(&p).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_gives_zero() {
        let p = problem(two_points(1.0), 2.0, 2.0, vec![0.0, 0.0]);
        assert_eq!(f_lr(&p).unwrap().value, 0.0);
        assert_eq!(f_lr_oracle(&p).unwrap(), 0.0);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let s = FiniteMMS::from_table(vec![vec![0.0; 5]; 5], vec![1.0; 5]).unwrap();
        let p = problem(s, 1.0, 1.0, vec![0.0; 5]);
        assert!(matches!(f_lr_oracle(&p), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn fx_equal_measures() {
        let s = two_points(1.0);
        let v = f_x(&s, 0, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(v <= 1e-6);
    }

    #[test]
    fn fx_gap_at_base_is_half() {
        let s = two_points(5.0);
        let v = f_x(&s, 0, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(v, 0.5);
    }
}
