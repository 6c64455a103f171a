//! Finite pointed metric measure spaces and their elementary geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_spaces::heisenberg::HeisenbergPoint;

/// Slack used for every ball-membership comparison.
pub const TIE_TOL: f64 = 1e-9;

/// Tolerance for the metric axioms.
pub const METRIC_TOL: f64 = 1e-9;

/// Storage of the distance function.
///
/// Model spaces with many points keep their metric implicit so that
/// `2^17`-point truncations stay cheap. Every variant is multiplied by the
/// space's scale factor on read.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Row-major `n × n` table.
    Table(Vec<f64>),
    /// Binary strings: `unit · (a XOR b)`.
    Dyadic { codes: Vec<u64>, unit: f64 },
    /// Circle nodes plus binary strings.
    TorusDyadic {
        nodes: Vec<u32>,
        codes: Vec<u64>,
        circle_points: u32,
        arc_step: f64,
        unit: f64,
    },
    /// Points on the real line.
    Line(Vec<f64>),
    /// Points of the Heisenberg group with the left-invariant Korányi distance.
    Heisenberg(Vec<HeisenbergPoint>),
}

impl Metric {
    fn len(&self) -> usize {
        match self {
            Metric::Table(t) => (t.len() as f64).sqrt().round() as usize,
            Metric::Dyadic { codes, .. } => codes.len(),
            Metric::TorusDyadic { nodes, .. } => nodes.len(),
            Metric::Line(x) => x.len(),
            Metric::Heisenberg(p) => p.len(),
        }
    }

    #[inline]
    fn raw(&self, n: usize, i: usize, j: usize) -> f64 {
        match self {
            Metric::Table(t) => t[i * n + j],
            Metric::Dyadic { codes, unit } => unit * (codes[i] ^ codes[j]) as f64,
            Metric::TorusDyadic {
                nodes,
                codes,
                circle_points,
                arc_step,
                unit,
            } => {
                let a = nodes[i].abs_diff(nodes[j]);
                let arc = a.min(circle_points - a) as f64 * arc_step;
                arc + unit * (codes[i] ^ codes[j]) as f64
            }
            Metric::Line(x) => (x[i] - x[j]).abs(),
            Metric::Heisenberg(p) => p[i].inv().mul(&p[j]).koranyi_norm(),
        }
    }

    fn subset(&self, n: usize, idx: &[usize]) -> Metric {
        match self {
            Metric::Table(t) => {
                let k = idx.len();
                let mut out = Vec::with_capacity(k * k);
                for &i in idx {
                    out.extend(idx.iter().map(|&j| t[i * n + j]));
                }
                Metric::Table(out)
            }
            Metric::Dyadic { codes, unit } => Metric::Dyadic {
                codes: idx.iter().map(|&i| codes[i]).collect(),
                unit: *unit,
            },
            Metric::TorusDyadic {
                nodes,
                codes,
                circle_points,
                arc_step,
                unit,
            } => Metric::TorusDyadic {
                nodes: idx.iter().map(|&i| nodes[i]).collect(),
                codes: idx.iter().map(|&i| codes[i]).collect(),
                circle_points: *circle_points,
                arc_step: *arc_step,
                unit: *unit,
            },
            Metric::Line(x) => Metric::Line(idx.iter().map(|&i| x[i]).collect()),
            Metric::Heisenberg(p) => Metric::Heisenberg(idx.iter().map(|&i| p[i]).collect()),
        }
    }
}

/// Largest `a XOR b` over the set, building the answer bit by bit from the top.
fn max_xor(codes: &[u64]) -> u64 {
    let mut best = 0u64;
    let mut mask = 0u64;
    let mut seen = std::collections::HashSet::with_capacity(codes.len());
    for bit in (0..64).rev() {
        mask |= 1 << bit;
        seen.clear();
        seen.extend(codes.iter().map(|c| c & mask));
        let want = best | (1 << bit);
        if seen.iter().any(|p| seen.contains(&(p ^ want))) {
            best = want;
        }
    }
    best
}

/// A finite metric space carrying a measure given by point weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMMS {
    n: usize,
    metric: Metric,
    scale: f64,
    weight: Vec<f64>,
    labels: Option<Vec<serde_json::Value>>,
}

impl FiniteMMS {
    /// Builds a space from a dense table, checking the metric axioms.
    pub fn from_table(dist: Vec<Vec<f64>>, weight: Vec<f64>) -> Result<Self> {
        let n = dist.len();
        if dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace("distance table is not square".into()));
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        let space = Self::from_metric(Metric::Table(flat), weight)?;
        space.check_metric()?;
        Ok(space)
    }

    /// Builds a space from a flat row-major table without the O(n³) triangle check.
    pub fn from_flat_table_unchecked(n: usize, flat: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        if flat.len() != n * n {
            return Err(Error::InvalidSpace("distance table has the wrong size".into()));
        }
        Self::from_metric(Metric::Table(flat), weight)
    }

    pub fn from_metric(metric: Metric, weight: Vec<f64>) -> Result<Self> {
        let n = metric.len();
        if n == 0 {
            return Err(Error::InvalidSpace("space has no points".into()));
        }
        if weight.len() != n {
            return Err(Error::InvalidSpace(format!(
                "{} weights for {} points",
                weight.len(),
                n
            )));
        }
        if weight.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSpace("weights must be finite and nonnegative".into()));
        }
        if weight.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidSpace("total mass must be positive".into()));
        }
        Ok(FiniteMMS {
            n,
            metric,
            scale: 1.0,
            weight,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<serde_json::Value>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidSpace("label count differs from point count".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.scale * self.metric.raw(self.n, i, j)
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weight[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn labels(&self) -> Option<&[serde_json::Value]> {
        self.labels.as_deref()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn total_mass(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::InvalidIndex { index: i, n: self.n })
        }
    }

    /// Distances from `i` to every point.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.d(i, j)).collect()
    }

    /// Dense row-major table.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.d(i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    pub fn diameter(&self) -> f64 {
        match &self.metric {
            Metric::Dyadic { codes, unit } => return self.scale * unit * max_xor(codes) as f64,
            Metric::Line(x) => {
                let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
                return self.scale * (hi - lo);
            }
            _ => {}
        }
        let mut best = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.max(self.d(i, j));
            }
        }
        best
    }

    /// Smallest positive distance, or `None` for a space whose points all coincide.
    pub fn min_positive_distance(&self) -> Option<f64> {
        match &self.metric {
            Metric::Dyadic { codes, unit } => {
                let mut c = codes.clone();
                c.sort_unstable();
                c.dedup();
                // The closest pair under XOR is adjacent in sorted order.
                return c.windows(2).map(|w| w[0] ^ w[1]).min().map(|x| self.scale * unit * x as f64);
            }
            Metric::Line(x) => {
                let mut c = x.clone();
                c.sort_by(f64::total_cmp);
                let best = c.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > 0.0).fold(f64::INFINITY, f64::min);
                return best.is_finite().then_some(self.scale * best);
            }
            _ => {}
        }
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.d(i, j);
                if v > 0.0 && v < best {
                    best = v;
                }
            }
        }
        best.is_finite().then_some(best)
    }

    /// Checks symmetry, zero diagonal and the triangle inequality to [`METRIC_TOL`].
    pub fn check_metric(&self) -> Result<()> {
        let n = self.n;
        let t = self.dense_raw_or_dense();
        for i in 0..n {
            if t[i * n + i].abs() > METRIC_TOL {
                return Err(Error::InvalidSpace(format!("d({i},{i}) is not zero")));
            }
            for j in 0..n {
                let v = t[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidSpace(format!("d({i},{j}) is negative or not finite")));
                }
                if (v - t[j * n + i]).abs() > METRIC_TOL {
                    return Err(Error::InvalidSpace(format!("d({i},{j}) is not symmetric")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = t[i * n + j];
                for k in 0..n {
                    if t[i * n + k] > dij + t[j * n + k] + METRIC_TOL {
                        return Err(Error::InvalidSpace(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn dense_raw_or_dense(&self) -> Vec<f64> {
        match (&self.metric, self.scale == 1.0) {
            (Metric::Table(t), true) => t.clone(),
            _ => self.dense(),
        }
    }

    pub(crate) fn scaled(&self, factor: f64) -> FiniteMMS {
        let mut out = self.clone();
        out.scale *= factor;
        out
    }

    pub(crate) fn reweighted(&self, weight: Vec<f64>) -> FiniteMMS {
        let mut out = self.clone();
        out.weight = weight;
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub kind: BallKind,
}

impl Ball {
    pub fn open(center: usize, radius: f64) -> Self {
        Ball {
            center,
            radius,
            kind: BallKind::Open,
        }
    }

    pub fn closed(center: usize, radius: f64) -> Self {
        Ball {
            center,
            radius,
            kind: BallKind::Closed,
        }
    }

    #[inline]
    pub fn admits(&self, d: f64) -> bool {
        match self.kind {
            BallKind::Open => d < self.radius - TIE_TOL,
            BallKind::Closed => d <= self.radius + TIE_TOL,
        }
    }
}

/// A space with a distinguished base point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedMMS {
    pub space: FiniteMMS,
    pub base: usize,
}

impl PointedMMS {
    pub fn new(space: FiniteMMS, base: usize) -> Result<Self> {
        space.check_index(base)?;
        Ok(PointedMMS { space, base })
    }

    /// Distance of every point to the base.
    pub fn heights(&self) -> Vec<f64> {
        self.space.row(self.base)
    }
}

/// A relation between two pointed spaces together with the gluing slack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
    pub slack: f64,
}

impl Correspondence {
    pub fn base_only(x: &PointedMMS, y: &PointedMMS, slack: f64) -> Self {
        Correspondence {
            pairs: vec![(x.base, y.base)],
            slack,
        }
    }

    /// Largest distortion `|d_X(p,p') − d_Y(q,q')|` over matched pairs.
    pub fn distortion(&self, x: &FiniteMMS, y: &FiniteMMS) -> f64 {
        let mut worst = 0.0f64;
        for (a, &(p, q)) in self.pairs.iter().enumerate() {
            for &(p2, q2) in &self.pairs[a + 1..] {
                worst = worst.max((x.d(p, p2) - y.d(q, q2)).abs());
            }
        }
        worst
    }

    /// The smallest slack for which the gluing formula is a metric.
    pub fn minimal_slack(&self, x: &FiniteMMS, y: &FiniteMMS) -> f64 {
        self.distortion(x, y) / 2.0
    }

    /// The smallest slack for [`glue_pointed`]: pairs must also agree on the
    /// distance to the base up to the slack.
    pub fn minimal_pointed_slack(&self, x: &PointedMMS, y: &PointedMMS) -> f64 {
        self.pairs
            .iter()
            .map(|&(p, q)| (x.space.d(x.base, p) - y.space.d(y.base, q)).abs())
            .fold(self.minimal_slack(&x.space, &y.space), f64::max)
    }
}

/// Result of gluing two spaces along a correspondence.
#[derive(Clone, Debug)]
pub struct Glued {
    pub space: FiniteMMS,
    pub base: usize,
    pub map_x: Vec<usize>,
    pub map_y: Vec<usize>,
}

pub fn ball_points(space: &FiniteMMS, b: &Ball) -> Result<Vec<usize>> {
    space.check_index(b.center)?;
    Ok((0..space.n())
        .filter(|&i| b.admits(space.d(b.center, i)))
        .collect())
}

pub fn ball_measure(space: &FiniteMMS, b: &Ball) -> Result<f64> {
    space.check_index(b.center)?;
    Ok((0..space.n())
        .filter(|&i| b.admits(space.d(b.center, i)))
        .map(|i| space.weight(i))
        .sum())
}

/// `T_r`: distances divided by `r`, mass normalised by the open ball `B(base, r)`.
pub fn rescale(p: &PointedMMS, r: f64) -> Result<PointedMMS> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::arg("rescale radius must be positive"));
    }
    let mass = ball_measure(&p.space, &Ball::open(p.base, r))?;
    if mass <= 0.0 {
        return Err(Error::ZeroMass { radius: r });
    }
    let weight = p.space.weights().iter().map(|w| w / mass).collect();
    let space = p.space.scaled(1.0 / r).reweighted(weight);
    Ok(PointedMMS {
        space,
        base: p.base,
    })
}

pub fn restrict(space: &FiniteMMS, subset: &[usize]) -> Result<FiniteMMS> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    for &i in subset {
        space.check_index(i)?;
    }
    let metric = space.metric.subset(space.n, subset);
    let weight = subset.iter().map(|&i| space.weight[i]).collect();
    let labels = space
        .labels
        .as_ref()
        .map(|l| subset.iter().map(|&i| l[i].clone()).collect());
    Ok(FiniteMMS {
        n: subset.len(),
        metric,
        scale: space.scale,
        weight,
        labels,
    })
}

/// `(r, μ(C(base, r)) / 2r)` for every radius.
pub fn density_profile(p: &PointedMMS, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg("radii must be positive"));
    }
    let h = p.heights();
    Ok(radii
        .iter()
        .map(|&r| {
            let b = Ball::closed(p.base, r);
            let m: f64 = h
                .iter()
                .zip(p.space.weights())
                .filter(|(d, _)| b.admits(**d))
                .map(|(_, w)| w)
                .sum();
            (r, m / (2.0 * r))
        })
        .collect())
}

/// Disjoint union with cross distance `min_{(p,q)} d_X(u,p) + ε + d_Y(q,v)`.
///
/// The formula is a metric exactly when the slack is at least half the
/// distortion of the correspondence; otherwise side distances would shrink
/// under metric closure and the correspondence is rejected.
pub fn glue(x: &PointedMMS, y: &PointedMMS, corr: &Correspondence) -> Result<Glued> {
    glue_with(x, y, corr, false)
}

/// Gluing in which the two bases coincide and every other pair sits at the
/// slack. This is a metric when the slack is at least half the distortion and
/// at least every pair's mismatch in distance to the base.
pub fn glue_pointed(x: &PointedMMS, y: &PointedMMS, corr: &Correspondence) -> Result<Glued> {
    glue_with(x, y, corr, true)
}

fn glue_with(x: &PointedMMS, y: &PointedMMS, corr: &Correspondence, pointed: bool) -> Result<Glued> {
    let (nx, ny) = (x.space.n(), y.space.n());
    if corr.pairs.is_empty() {
        return Err(Error::InvalidCorrespondence("no pairs".into()));
    }
    if !(corr.slack >= 0.0 && corr.slack.is_finite()) {
        return Err(Error::InvalidCorrespondence("slack must be finite and nonnegative".into()));
    }
    for &(p, q) in &corr.pairs {
        if p >= nx || q >= ny {
            return Err(Error::InvalidCorrespondence(format!("pair ({p},{q}) out of range")));
        }
    }
    if !corr.pairs.contains(&(x.base, y.base)) {
        return Err(Error::InvalidCorrespondence("base is not matched to base".into()));
    }
    let dis = corr.distortion(&x.space, &y.space);
    if dis > 2.0 * corr.slack + METRIC_TOL {
        return Err(Error::InvalidCorrespondence(format!(
            "distortion {dis} exceeds twice the slack {}",
            corr.slack
        )));
    }
    if pointed {
        let worst = corr.minimal_pointed_slack(x, y);
        if worst > corr.slack + METRIC_TOL {
            return Err(Error::InvalidCorrespondence(format!(
                "distance to the base differs by {worst}, more than the slack {}",
                corr.slack
            )));
        }
    }

    let n = nx + ny;
    let dx = x.space.dense();
    let dy = y.space.dense();
    let mut t = vec![0.0; n * n];
    for i in 0..nx {
        t[i * n..i * n + nx].copy_from_slice(&dx[i * nx..(i + 1) * nx]);
    }
    for i in 0..ny {
        let r = (nx + i) * n + nx;
        t[r..r + ny].copy_from_slice(&dy[i * ny..(i + 1) * ny]);
    }

    // Group matched Y points by their X partner so the min-plus product
    // runs over distinct partners only.
    let mut partners: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut sorted = corr.pairs.clone();
    sorted.sort_unstable();
    sorted.dedup();
    for (p, q) in sorted {
        match partners.last_mut() {
            Some((lp, qs)) if *lp == p => qs.push(q),
            _ => partners.push((p, vec![q])),
        }
    }
    // via[p][v] = ε + min over q ~ p of d_Y(q, v)
    let via: Vec<Vec<f64>> = partners
        .iter()
        .map(|(_, qs)| {
            (0..ny)
                .map(|v| {
                    corr.slack
                        + qs.iter()
                            .map(|&q| dy[q * ny + v])
                            .fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();
    let mut cross = vec![f64::INFINITY; ny];
    let base_row: Vec<f64> = (0..ny).map(|v| dy[y.base * ny + v]).collect();
    for u in 0..nx {
        cross.iter_mut().for_each(|c| *c = f64::INFINITY);
        for ((p, _), row) in partners.iter().zip(&via) {
            let du = dx[u * nx + p];
            for (c, r) in cross.iter_mut().zip(row) {
                let v = du + r;
                if v < *c {
                    *c = v;
                }
            }
        }
        if pointed {
            let du = dx[u * nx + x.base];
            for (c, r) in cross.iter_mut().zip(&base_row) {
                *c = c.min(du + r);
            }
        }
        for (v, c) in cross.iter().enumerate() {
            t[u * n + nx + v] = *c;
            t[(nx + v) * n + u] = *c;
        }
    }

    let mut weight = Vec::with_capacity(n);
    weight.extend_from_slice(x.space.weights());
    weight.extend_from_slice(y.space.weights());
    let space = FiniteMMS::from_flat_table_unchecked(n, t, weight)?;
    Ok(Glued {
        space,
        base: x.base,
        map_x: (0..nx).collect(),
        map_y: (nx..n).collect(),
    })
}

/// JSON exchange format of a (pointed) space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub n: usize,
    pub dist: Vec<Vec<f64>>,
    pub weight: Vec<f64>,
    #[serde(default)]
    pub base: Option<usize>,
    #[serde(default)]
    pub labels: Option<Vec<serde_json::Value>>,
}

impl SpaceJson {
    pub fn from_space(space: &FiniteMMS, base: Option<usize>) -> Self {
        let n = space.n();
        let t = space.dense();
        SpaceJson {
            n,
            dist: t.chunks(n.max(1)).map(|r| r.to_vec()).collect(),
            weight: space.weights().to_vec(),
            base,
            labels: space.labels().map(|l| l.to_vec()),
        }
    }

    pub fn into_space(self) -> Result<(FiniteMMS, Option<usize>)> {
        if self.dist.len() != self.n {
            return Err(Error::InvalidSpace(format!(
                "n = {} but the table has {} rows",
                self.n,
                self.dist.len()
            )));
        }
        let mut space = FiniteMMS::from_table(self.dist, self.weight)?;
        if let Some(labels) = self.labels {
            space = space.with_labels(labels)?;
        }
        if let Some(b) = self.base {
            space.check_index(b)?;
        }
        Ok((space, self.base))
    }
}

pub fn to_json(space: &FiniteMMS, base: Option<usize>) -> String {
    serde_json::to_string(&SpaceJson::from_space(space, base)).expect("space serialises")
}

pub fn from_json(text: &str) -> Result<(FiniteMMS, Option<usize>)> {
    let parsed: SpaceJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidSpace(e.to_string()))?;
    parsed.into_space()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> FiniteMMS {
        FiniteMMS::from_table(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn implicit_extremes_match_the_table() {
        let codes = vec![5u64, 9, 12, 0, 33, 5, 17];
        let line = vec![0.5, -1.0, 2.25, 0.5, 7.0];
        for metric in [Metric::Dyadic { codes, unit: 0.25 }, Metric::Line(line)] {
            let n = metric.len();
            let x = FiniteMMS::from_metric(metric, vec![1.0; n]).unwrap().scaled(3.0);
            let t = FiniteMMS::from_flat_table_unchecked(n, x.dense(), vec![1.0; n]).unwrap();
            assert_eq!(x.diameter(), t.diameter());
            assert_eq!(x.min_positive_distance(), t.min_positive_distance());
        }
    }

    #[test]
    fn rejects_triangle_violation() {
        let bad = FiniteMMS::from_table(
            vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
            vec![1.0; 3],
        );
        assert!(matches!(bad, Err(Error::InvalidSpace(_))));
    }

    #[test]
    fn closed_radius_zero_is_the_point() {
        let s = path3();
        assert_eq!(ball_points(&s, &Ball::closed(1, 0.0)).unwrap(), vec![1]);
        assert!(ball_points(&s, &Ball::open(1, 0.0)).unwrap().is_empty());
    }

    #[test]
    fn glue_one_point_spaces() {
        let one = PointedMMS::new(FiniteMMS::from_table(vec![vec![0.0]], vec![1.0]).unwrap(), 0).unwrap();
        let g = glue(&one, &one, &Correspondence { pairs: vec![(0, 0)], slack: 0.5 }).unwrap();
        assert_eq!(g.space.d(0, 1), 0.5);
    }

    #[test]
    fn glue_base_only_formula() {
        let p = PointedMMS::new(path3(), 0).unwrap();
        let g = glue(&p, &p, &Correspondence::base_only(&p, &p, 0.25)).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(g.space.d(u, 3 + v), p.space.d(u, 0) + 0.25 + p.space.d(0, v));
            }
        }
    }

    #[test]
    fn glue_rejects_distorted_matching() {
        let p = PointedMMS::new(path3(), 0).unwrap();
        let c = Correspondence { pairs: vec![(0, 0), (1, 2)], slack: 0.1 };
        assert!(matches!(glue(&p, &p, &c), Err(Error::InvalidCorrespondence(_))));
        let c = Correspondence { pairs: vec![(0, 0), (1, 2)], slack: 0.5 };
        let g = glue(&p, &p, &c).unwrap();
        g.space.check_metric().unwrap();
    }

    #[test]
    fn restrict_empty_fails() {
        assert_eq!(restrict(&path3(), &[]), Err(Error::EmptySubset));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = FiniteMMS::from_table(
            vec![vec![0.0, 0.125], vec![0.125, 0.0]],
            vec![0.0009765625, 3.0],
        )
        .unwrap();
        let text = to_json(&s, Some(1));
        let (back, base) = from_json(&text).unwrap();
        assert_eq!(base, Some(1));
        assert_eq!(back.dense(), s.dense());
        assert_eq!(back.weights(), s.weights());
    }

    #[test]
    fn rescale_without_mass_fails() {
        let s = FiniteMMS::from_table(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.0, 1.0]).unwrap();
        let p = PointedMMS::new(s, 0).unwrap();
        assert_eq!(rescale(&p, 0.5), Err(Error::ZeroMass { radius: 0.5 }));
    }
}
