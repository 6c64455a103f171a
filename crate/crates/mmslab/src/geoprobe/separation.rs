use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::{FiniteMMS, TIE_TOL};

/// Ratio of separation to diameter that counts as a clean gap.
pub const SEPARATION_RATIO: f64 = 0.25;
/// Consecutive clean scales needed to raise the flag.
pub const SEPARATION_RUN: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationEntry {
    pub scale: f64,
    pub cluster_count: usize,
    pub max_cluster_diameter: f64,
    /// `None` when everything is one cluster.
    pub min_cluster_separation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationProfile {
    pub entries: Vec<SeparationEntry>,
    /// Longest run of consecutive scales whose clusters have separation/diameter
    /// at least 1/4 and diameter at most four times the scale.
    pub longest_clean_run: usize,
    pub unrectifiable_evidence: bool,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a] = b;
        }
        a != b
    }
}

/// Minimum spanning tree edges `(weight, u, v)` by Prim's algorithm.
pub(crate) fn mst(x: &FiniteMMS) -> Vec<(f64, usize, usize)> {
    let n = x.n();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut u = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = x.d(u, v);
            if d < best[v] {
                best[v] = d;
                parent[v] = u;
            }
            if best[v] < next_d {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((next_d, parent[next], next));
        u = next;
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges
}

/// Single-linkage clusters (points joined when closer than the scale) at each scale.
pub fn separation_profile(x: &FiniteMMS, scales: &[f64]) -> Result<SeparationProfile> {
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::arg("scales must be strictly decreasing"));
    }
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::arg("scales must be positive"));
    }
    let n = x.n();
    let tree = mst(x);
    let mut entries = Vec::with_capacity(scales.len());
    for &s in scales {
        let mut dsu = Dsu((0..n).collect());
        let mut sep = None;
        for &(w, a, b) in &tree {
            if w < s - TIE_TOL {
                dsu.union(a, b);
            } else {
                sep = Some(w);
                break;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = dsu.find(i);
            groups.entry(r).or_default().push(i);
        }
        let mut diam = 0.0f64;
        for members in groups.values() {
            for (k, &i) in members.iter().enumerate() {
                for &j in &members[k + 1..] {
                    diam = diam.max(x.d(i, j));
                }
            }
        }
        entries.push(SeparationEntry {
            scale: s,
            cluster_count: groups.len(),
            max_cluster_diameter: diam,
            min_cluster_separation: sep,
        });
    }
    let mut run = 0;
    let mut longest = 0;
    for e in &entries {
        let clean = match e.min_cluster_separation {
            Some(sep) if e.cluster_count >= 2 && e.max_cluster_diameter > 0.0 => {
                sep / e.max_cluster_diameter >= SEPARATION_RATIO
                    && e.max_cluster_diameter <= e.scale / SEPARATION_RATIO
            }
            _ => false,
        };
        run = if clean { run + 1 } else { 0 };
        longest = longest.max(run);
    }
    Ok(SeparationProfile {
        entries,
        longest_clean_run: longest,
        unrectifiable_evidence: longest >= SEPARATION_RUN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::{make_r_grid, make_s, make_t, STruncationSpec, TTruncationSpec};

    #[test]
    fn dyadic_space_branches_binary() {
        let s = make_s(STruncationSpec { m: -4, n: 3 }).unwrap().space;
        let scales: Vec<f64> = (-3..=3).rev().map(|j| 2f64.powi(j)).collect();
        let p = separation_profile(&s, &scales).unwrap();
        for w in p.entries.windows(2) {
            assert_eq!(w[1].cluster_count, 2 * w[0].cluster_count);
        }
        for e in &p.entries {
            let ratio = e.min_cluster_separation.unwrap() / e.max_cluster_diameter;
            assert!(ratio >= 0.5, "{e:?}");
        }
        assert!(p.unrectifiable_evidence);
    }

    #[test]
    fn grid_is_one_cluster() {
        let g = make_r_grid(0.1, 3.0).unwrap().space;
        let p = separation_profile(&g, &[2.0, 1.0, 0.5, 0.25, 0.125]).unwrap();
        assert!(p.entries.iter().all(|e| e.cluster_count == 1));
        assert!(!p.unrectifiable_evidence);
    }

    #[test]
    fn circles_fail_the_ratio_at_fine_scales() {
        let t = make_t(TTruncationSpec { circle_points: 32, m: 0, n_levels: 3 }).unwrap().space;
        // Circles have diameter 1 and points 1/16 apart.
        let p = separation_profile(&t, &[0.5, 0.25, 0.125, 0.1]).unwrap();
        for e in &p.entries {
            assert_eq!(e.cluster_count, 8);
        }
        for e in &p.entries[2..] {
            assert!(e.max_cluster_diameter > e.scale / SEPARATION_RATIO);
        }
        assert!(!p.unrectifiable_evidence);
    }
}
