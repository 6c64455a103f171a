//! Lower bounds on `d*` that hold in every ambient space.
//!
//! Two families of test functions are used. Functions of the distance to the
//! base reduce to the same problem on the pushed-forward measures on a
//! half-line. The second family is `ψ(dist(·, Q))` for a cluster `Q` around
//! the base of one space: its integral over that space is computed exactly,
//! while on the other space every path leaving the base must cross the
//! support of `ψ`, which bounds that integral from below.

use crate::error::Result;
use crate::geoprobe::mst;
use crate::lip_dual::{fx_search, DualInstance};
use crate::mms_core::{PointedMMS, TIE_TOL};

/// Bisection steps for the lower bounds.
pub const LOWER_ITERATIONS: usize = 30;

/// Most cluster candidates kept per space.
const MAX_CLUSTERS: usize = 48;

/// `d*` lower bound from test functions of the distance to the base.
pub fn pushforward_lower(x: &PointedMMS, y: &PointedMMS) -> Result<f64> {
    let hx = x.heights();
    let hy = y.heights();
    let heights: Vec<f64> = hx.iter().chain(&hy).copied().collect();
    let mass: Vec<f64> = x
        .space
        .weights()
        .iter()
        .copied()
        .chain(y.space.weights().iter().map(|w| -w))
        .collect();
    let inst = DualInstance::on_line(&heights)?;
    let out = fx_search(&inst, &mass, LOWER_ITERATIONS);
    // P fails at the lower end of the bracket, which is what certifies it.
    Ok(out.bracket.0)
}

/// A cluster around the base with its exact distance function.
struct Cluster {
    rho: f64,
    gap: f64,
    dist: Vec<f64>,
}

/// A path from the base with its worst mass per unit length.
#[derive(Clone, Copy, Debug)]
struct Chain {
    kappa: f64,
    step: f64,
    end_height: f64,
}

/// `(max distance to the base, gap to the rest)` of every single-linkage
/// cluster containing the base.
pub(crate) fn base_clusters(p: &PointedMMS) -> Vec<(f64, f64)> {
    clusters(p).into_iter().map(|c| (c.rho, c.gap)).collect()
}

fn clusters(p: &PointedMMS) -> Vec<Cluster> {
    let x = &p.space;
    let n = x.n();
    let h = p.heights();
    let tree = mst(x);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }

    let mut in_q = vec![false; n];
    in_q[p.base] = true;
    let mut members = vec![p.base];
    let mut dist: Vec<f64> = (0..n).map(|j| x.d(p.base, j)).collect();
    let snapshot = |members: &[usize], in_q: &[bool], dist: &[f64]| {
        let gap = (0..n)
            .filter(|&j| !in_q[j])
            .map(|j| dist[j])
            .fold(f64::INFINITY, f64::min);
        let rho = members.iter().map(|&i| h[i]).fold(0.0, f64::max);
        Cluster {
            rho,
            gap,
            dist: dist.to_vec(),
        }
    };
    let mut out = vec![snapshot(&members, &in_q, &dist)];
    let mut k = 0;
    while k < tree.len() {
        let w = tree[k].0;
        while k < tree.len() && tree[k].0 <= w + TIE_TOL {
            let (a, b) = (find(&mut parent, tree[k].1), find(&mut parent, tree[k].2));
            if a != b {
                parent[a] = b;
            }
            k += 1;
        }
        let root = find(&mut parent, p.base);
        let added: Vec<usize> = (0..n)
            .filter(|&j| !in_q[j] && find(&mut parent, j) == root)
            .collect();
        if added.is_empty() {
            continue;
        }
        for &j in &added {
            in_q[j] = true;
        }
        members.extend(&added);
        for (v, d) in dist.iter_mut().enumerate() {
            for &j in &added {
                *d = d.min(x.d(j, v));
            }
        }
        if members.len() == n {
            break;
        }
        out.push(snapshot(&members, &in_q, &dist));
    }
    if out.len() > MAX_CLUSTERS {
        let keep = crate::geoprobe::stride_sample(out.len(), MAX_CLUSTERS);
        let mut it = 0;
        out.retain(|_| {
            let k = keep.binary_search(&it).is_ok();
            it += 1;
            k
        });
    }
    out
}

/// One path per branch of the shortest-path tree of the `step`-graph,
/// each running to the highest point of its branch.
fn chains(p: &PointedMMS, step: f64) -> Vec<Chain> {
    let x = &p.space;
    let n = x.n();
    let h = p.heights();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[p.base] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v] && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for v in 0..n {
            if done[v] {
                continue;
            }
            let d = x.d(u, v);
            if d > 0.0 && d <= step + TIE_TOL && dist[u] + d < dist[v] {
                dist[v] = dist[u] + d;
                parent[v] = u;
            }
        }
    }
    // Branch of every reached point: the child of the base it descends from.
    let mut branch = vec![usize::MAX; n];
    for v in 0..n {
        if v == p.base || parent[v] == usize::MAX {
            continue;
        }
        let mut u = v;
        while parent[u] != p.base {
            u = parent[u];
        }
        branch[v] = u;
    }
    let mut best: Vec<(usize, usize)> = Vec::new();
    for v in 0..n {
        if branch[v] == usize::MAX {
            continue;
        }
        match best.iter_mut().find(|(b, _)| *b == branch[v]) {
            Some(e) => {
                if h[v] > h[e.1] {
                    e.1 = v;
                }
            }
            None => best.push((branch[v], v)),
        }
    }
    best.into_iter()
        .map(|(_, end)| {
            let mut kappa = f64::INFINITY;
            let mut longest = 0.0f64;
            let mut u = end;
            while u != p.base {
                let s = x.d(parent[u], u);
                kappa = kappa.min(x.weight(u) / s);
                longest = longest.max(s);
                u = parent[u];
            }
            Chain {
                kappa,
                step: longest,
                end_height: h[end],
            }
        })
        .collect()
}

/// `∫₀^B min(1, L t, L (b − t))⁺ dt`.
fn trapezoid_integral(l: f64, b: f64, upto: f64) -> f64 {
    let f = |t: f64| (l * t).min(1.0).min(l * (b - t)).max(0.0);
    let upto = upto.min(b).max(0.0);
    let mut knots = vec![0.0, upto];
    for k in [1.0 / l, b - 1.0 / l, b / 2.0] {
        if k > 0.0 && k < upto {
            knots.push(k);
        }
    }
    knots.sort_by(f64::total_cmp);
    // The integrand is linear between knots.
    knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (f(w[0]) + f(w[1]))).sum()
}

struct Orientation {
    clusters: Vec<Cluster>,
    weights: Vec<f64>,
    chains: Vec<Vec<Chain>>,
}

impl Orientation {
    fn new(q_side: &PointedMMS, chain_side: &PointedMMS) -> Self {
        let min_step = chain_side.space.min_positive_distance().unwrap_or(1.0);
        let chains = [1.0, 1.5, 2.0, 4.0]
            .iter()
            .map(|f| chains(chain_side, f * min_step))
            .collect();
        Orientation {
            clusters: clusters(q_side),
            weights: q_side.space.weights().to_vec(),
            chains,
        }
    }

    /// Best certified value of `F^{L,L}` over the family.
    fn value(&self, l: f64) -> f64 {
        let mut best = 0.0f64;
        for q in &self.clusters {
            let room = l - q.rho;
            if room <= 0.0 {
                continue;
            }
            for b in [q.gap.min(room), room] {
                if b <= 0.0 {
                    continue;
                }
                let psi = |t: f64| (l * t).min(1.0).min(l * (b - t)).max(0.0);
                let exact: f64 = q.dist.iter().zip(&self.weights).map(|(&t, w)| w * psi(t)).sum();
                for set in &self.chains {
                    let crossing: f64 = set
                        .iter()
                        .map(|c| {
                            let reach = b.min(c.end_height - q.rho);
                            if reach <= 0.0 {
                                return 0.0;
                            }
                            c.kappa * (trapezoid_integral(l, b, reach) - l * c.step * reach).max(0.0)
                        })
                        .sum();
                    best = best.max(crossing - exact);
                }
            }
        }
        best
    }
}

/// `d*` lower bound from cluster-distance test functions in both orientations.
pub fn cluster_lower(x: &PointedMMS, y: &PointedMMS) -> f64 {
    let sides = [Orientation::new(x, y), Orientation::new(y, x)];
    let holds = |eps: f64| sides.iter().any(|o| o.value(1.0 / eps) >= eps);
    if holds(0.5) {
        return 0.5;
    }
    // A function certified at ε stays admissible for every smaller ε, so any
    // verified point is a valid lower bound.
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..LOWER_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest of the certified lower bounds.
pub fn dstar_lower_tent(x: &PointedMMS, y: &PointedMMS) -> Result<f64> {
    let tent = pushforward_lower(x, y)?;
    Ok(tent.max(cluster_lower(x, y)).min(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_areas() {
        // Full trapezoid: b − 1/L.
        assert!((trapezoid_integral(4.0, 2.0, 2.0) - 1.75).abs() < 1e-12);
        // Triangle when b < 2/L: L b² / 4.
        assert!((trapezoid_integral(2.0, 0.5, 0.5) - 0.125).abs() < 1e-12);
        // Partial: ramp up to 1/L then flat.
        assert!((trapezoid_integral(2.0, 4.0, 1.0) - 0.75).abs() < 1e-12);
        assert_eq!(trapezoid_integral(2.0, 1.0, -1.0), 0.0);
    }
}
