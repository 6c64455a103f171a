//! Besicovitch pairs and what they buy: the neighbour map between the two
//! halves of a pair, doubling, product coordinates and a finite-scale
//! classifier for uniform spaces.

mod classify;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::{FiniteMMS, TIE_TOL};

pub use classify::{
    classify_uniform, default_floor, default_tol, epsilon_components, ClassificationResult, Evidence,
    Verdict,
};

/// A pair is certified when its margin is at least `-PAIR_TOL`.
pub const PAIR_TOL: f64 = 1e-9;
/// Tolerance for the pair identities in [`verify_pair_properties`].
pub const PROPERTY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub a: usize,
    pub b: usize,
    pub d: f64,
    /// `min d(x,y) − d` over `x ∈ B(a,d)`, `y ∈ B(b,d)`.
    pub margin: f64,
}

fn open_ball(x: &FiniteMMS, c: usize, r: f64) -> Vec<usize> {
    (0..x.n()).filter(|&i| x.d(c, i) < r - TIE_TOL).collect()
}

/// `min d(p,q) − d` over the two sets, stopping early once it drops below `stop`.
fn cross_margin(x: &FiniteMMS, left: &[usize], right: &[usize], d: f64, stop: f64) -> (f64, (usize, usize)) {
    let mut best = f64::INFINITY;
    let mut witness = (left[0], right[0]);
    for &p in left {
        for &q in right {
            let v = x.d(p, q) - d;
            if v < best {
                best = v;
                witness = (p, q);
                if best < stop {
                    return (best, witness);
                }
            }
        }
    }
    (best, witness)
}

/// Exact margin of the pair `(a, b)`; non-negative iff it is a Besicovitch pair.
pub fn is_besicovitch_pair(x: &FiniteMMS, a: usize, b: usize) -> Result<f64> {
    x.check_index(a)?;
    x.check_index(b)?;
    if a == b {
        return Err(Error::arg("a pair needs two distinct points"));
    }
    let d = x.d(a, b);
    if d <= 0.0 {
        return Err(Error::arg("pair points coincide"));
    }
    let ba = open_ball(x, a, d);
    let bb = open_ball(x, b, d);
    Ok(cross_margin(x, &ba, &bb, d, f64::NEG_INFINITY).0)
}

/// Which pairs to look for: `min_d < d ≤ max_d`, optionally only with the
/// first point drawn from `anchors`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSearch {
    pub min_d: f64,
    pub max_d: f64,
    pub anchors: Option<Vec<usize>>,
}

impl PairSearch {
    pub fn up_to(max_d: f64) -> Self {
        PairSearch {
            min_d: 0.0,
            max_d,
            anchors: None,
        }
    }
}

/// Points within `reach` of `a`, nearest first.
fn sorted_near(x: &FiniteMMS, a: usize, reach: f64) -> Vec<(f64, usize)> {
    let mut near: Vec<(f64, usize)> = (0..x.n())
        .map(|j| (x.d(a, j), j))
        .filter(|&(d, _)| d < reach)
        .collect();
    near.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    near
}

/// Tests `(a, b)` using `near`, the points of `B(a, 2d)` sorted by distance from `a`.
fn certify_from(x: &FiniteMMS, near: &[(f64, usize)], a: usize, b: usize) -> Option<PairCertificate> {
    let d = x.d(a, b);
    let a_end = near.partition_point(|p| p.0 < d - TIE_TOL);
    let ba: Vec<usize> = near[..a_end].iter().map(|p| p.1).collect();
    // A point strictly inside both balls refutes the pair at once.
    if ba.iter().any(|&p| x.d(b, p) < d - TIE_TOL) {
        return None;
    }
    let bb: Vec<usize> = near
        .iter()
        .take_while(|p| p.0 < 2.0 * d)
        .map(|p| p.1)
        .filter(|&q| x.d(b, q) < d - TIE_TOL)
        .collect();
    let (margin, _) = cross_margin(x, &ba, &bb, d, -PAIR_TOL);
    (margin >= -PAIR_TOL).then_some(PairCertificate { a, b, d, margin })
}

fn pairs_from_anchor(x: &FiniteMMS, a: usize, search: &PairSearch, only_above: bool) -> Vec<PairCertificate> {
    let near = sorted_near(x, a, 2.0 * search.max_d + TIE_TOL);
    near.iter()
        .filter(|&&(d, b)| d > search.min_d + TIE_TOL && d <= search.max_d + TIE_TOL && (!only_above || b > a))
        .filter_map(|&(_, b)| certify_from(x, &near, a, b))
        .collect()
}

/// All certified pairs allowed by `search`, sorted by `(d, a, b)`.
pub fn find_pairs_with(x: &FiniteMMS, search: &PairSearch) -> Result<Vec<PairCertificate>> {
    if !(search.max_d >= 0.0) || search.min_d.is_nan() {
        return Err(Error::arg("pair distance bounds must be non-negative"));
    }
    let (anchors, only_above): (Vec<usize>, bool) = match &search.anchors {
        Some(list) => {
            for &a in list {
                x.check_index(a)?;
            }
            let unique: BTreeSet<usize> = list.iter().copied().collect();
            (unique.into_iter().collect(), false)
        }
        None => ((0..x.n()).collect(), true),
    };
    #[cfg(feature = "parallel")]
    let found: Vec<PairCertificate> = {
        use rayon::prelude::*;
        anchors
            .par_iter()
            .flat_map_iter(|&a| pairs_from_anchor(x, a, search, only_above))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<PairCertificate> = anchors
        .iter()
        .flat_map(|&a| pairs_from_anchor(x, a, search, only_above))
        .collect();
    let mut seen = BTreeSet::new();
    let mut out: Vec<PairCertificate> = found
        .into_iter()
        .filter(|p| seen.insert((p.a.min(p.b), p.a.max(p.b))))
        .collect();
    out.sort_by(|p, q| p.d.total_cmp(&q.d).then(p.a.cmp(&q.a)).then(p.b.cmp(&q.b)));
    Ok(out)
}

/// Every certified pair with `d ≤ max_d`.
pub fn find_pairs(x: &FiniteMMS, max_d: f64) -> Result<Vec<PairCertificate>> {
    find_pairs_with(x, &PairSearch::up_to(max_d))
}

/// Smallest certified pair distance strictly above `floor`.
///
/// Any finite space has pairs at its smallest distance (two nearest
/// neighbours whose open balls are singletons), so a floor at the
/// resolution of the sample is what makes the answer meaningful.
pub fn min_pair_distance(x: &FiniteMMS, floor: f64) -> Result<Option<f64>> {
    let first = |a: usize| -> Option<f64> {
        let row = sorted_near(x, a, f64::INFINITY);
        row.iter()
            .filter(|&&(d, b)| b != a && d > floor + TIE_TOL)
            .find_map(|&(d, b)| {
                let end = row.partition_point(|p| p.0 < 2.0 * d);
                certify_from(x, &row[..end], a, b).map(|_| d)
            })
    };
    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        (0..x.n()).into_par_iter().filter_map(first).min_by(f64::total_cmp)
    };
    #[cfg(not(feature = "parallel"))]
    let best = (0..x.n()).filter_map(first).min_by(f64::total_cmp);
    Ok(best)
}

/// Resolution used to decide which boundary points belong to a closure.
pub fn closure_resolution(x: &FiniteMMS, r: f64) -> f64 {
    x.min_positive_distance().unwrap_or(0.0).min(r / 2.0)
}

fn closure_with(x: &FiniteMMS, c: usize, r: f64, eta: f64) -> Vec<usize> {
    let open = open_ball(x, c, r);
    let mut out = open.clone();
    for y in 0..x.n() {
        if (x.d(c, y) - r).abs() <= TIE_TOL && open.iter().any(|&z| x.d(y, z) <= eta + TIE_TOL) {
            out.push(y);
        }
    }
    out.sort_unstable();
    out
}

/// Discrete closure `C(c, r)` of the open ball: the open ball plus the points
/// at distance exactly `r` lying within the sample resolution of it.
pub fn closure_ball(x: &FiniteMMS, c: usize, r: f64) -> Result<Vec<usize>> {
    x.check_index(c)?;
    if !(r > 0.0) {
        return Err(Error::arg("closure radius must be positive"));
    }
    Ok(closure_with(x, c, r, closure_resolution(x, r)))
}

/// The map exchanging the two halves of a pair, each point sent to its
/// nearest point on the other side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborMap {
    pub pair: PairCertificate,
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    /// `(point, image)` sorted by point.
    pub map: Vec<(usize, usize)>,
    /// Points whose nearest partner was not unique; the lowest index was used.
    pub ties: Vec<usize>,
}

impl NeighborMap {
    pub fn get(&self, p: usize) -> Option<usize> {
        self.map
            .binary_search_by_key(&p, |e| e.0)
            .ok()
            .map(|k| self.map[k].1)
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.iter().map(|e| e.0)
    }
}

fn nearest(x: &FiniteMMS, p: usize, side: &[usize]) -> (usize, bool) {
    let mut best = side[0];
    let mut best_d = x.d(p, best);
    let mut tie = false;
    for &q in &side[1..] {
        let v = x.d(p, q);
        if v < best_d - TIE_TOL {
            best = q;
            best_d = v;
            tie = false;
        } else if (v - best_d).abs() <= TIE_TOL {
            tie = true;
        }
    }
    (best, tie)
}

fn neighbor_map_with(x: &FiniteMMS, pair: &PairCertificate, eta: f64) -> Result<NeighborMap> {
    let ca = closure_with(x, pair.a, pair.d, eta);
    let cb = closure_with(x, pair.b, pair.d, eta);
    let in_b: BTreeSet<usize> = cb.iter().copied().collect();
    let in_a: BTreeSet<usize> = ca.iter().copied().collect();
    let side_a: Vec<usize> = ca.into_iter().filter(|p| !in_b.contains(p)).collect();
    let side_b: Vec<usize> = cb.into_iter().filter(|p| !in_a.contains(p)).collect();
    if side_a.is_empty() || side_b.is_empty() {
        return Err(Error::EmptySide);
    }
    let mut map = Vec::with_capacity(side_a.len() + side_b.len());
    let mut ties = Vec::new();
    for (from, to) in [(&side_a, &side_b), (&side_b, &side_a)] {
        for &p in from {
            let (q, tie) = nearest(x, p, to);
            if tie {
                ties.push(p);
            }
            map.push((p, q));
        }
    }
    map.sort_unstable();
    ties.sort_unstable();
    Ok(NeighborMap {
        pair: pair.clone(),
        side_a,
        side_b,
        map,
        ties,
    })
}

fn check_pair(x: &FiniteMMS, pair: &PairCertificate) -> Result<()> {
    x.check_index(pair.a)?;
    x.check_index(pair.b)?;
    if pair.a == pair.b || !(pair.d > 0.0) {
        return Err(Error::arg("pair needs distinct points at positive distance"));
    }
    Ok(())
}

/// `ι_{ab}` on `C(a,d) ∪ C(b,d)`.
pub fn neighbor_map(x: &FiniteMMS, pair: &PairCertificate) -> Result<NeighborMap> {
    check_pair(x, pair)?;
    neighbor_map_with(x, pair, closure_resolution(x, pair.d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairProperty {
    /// `C(a,2d) = C(a,d) ∪ C(b,d)`.
    DoubleBall,
    /// `C(x,d) = C(a,d)` for `x ∈ C(a,d)`, and the same on the `b` side.
    ComponentBalls,
    /// `d(x, ι(x)) = d`.
    FixedDistance,
    /// `d(x,z) = d + d(ι(x), z)` for `x ∈ C(a,d)`, `z ∈ C(b,d)`.
    CrossDistance,
    /// `ι(ι(x)) = x`.
    Involution,
    /// `d(ι(x), ι(y)) = d(x,y)`.
    Isometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: PairProperty,
    pub holds: bool,
    /// Largest violation for the metric identities; `None` for set identities.
    pub max_error: Option<f64>,
    pub witness: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub pair: PairCertificate,
    pub checks: Vec<PropertyCheck>,
    pub ties: Vec<usize>,
    pub all_hold: bool,
}

impl PropertyReport {
    pub fn check(&self, p: PairProperty) -> &PropertyCheck {
        self.checks
            .iter()
            .find(|c| c.property == p)
            .expect("every property is checked")
    }
}

struct Worst {
    err: f64,
    witness: Option<Vec<usize>>,
}

impl Worst {
    fn new() -> Self {
        Worst { err: 0.0, witness: None }
    }

    fn see(&mut self, err: f64, pts: &[usize]) {
        if err > self.err {
            self.err = err;
            self.witness = Some(pts.to_vec());
        }
    }

    fn into_check(self, property: PairProperty) -> PropertyCheck {
        PropertyCheck {
            property,
            holds: self.err <= PROPERTY_TOL,
            max_error: Some(self.err),
            witness: self.witness,
        }
    }
}

fn set_check(property: PairProperty, mismatch: Option<Vec<usize>>) -> PropertyCheck {
    PropertyCheck {
        property,
        holds: mismatch.is_none(),
        max_error: None,
        witness: mismatch,
    }
}

/// Checks the six pair identities, reporting the worst witness for each.
pub fn verify_pair_properties(x: &FiniteMMS, pair: &PairCertificate) -> Result<PropertyReport> {
    check_pair(x, pair)?;
    let d = pair.d;
    let eta = closure_resolution(x, d);
    let nm = neighbor_map_with(x, pair, eta)?;
    let ca = closure_with(x, pair.a, d, eta);
    let cb = closure_with(x, pair.b, d, eta);
    let mut checks = Vec::with_capacity(6);

    let double = closure_with(x, pair.a, 2.0 * d, eta.max(closure_resolution(x, 2.0 * d)));
    let union: BTreeSet<usize> = ca.iter().chain(&cb).copied().collect();
    let double_set: BTreeSet<usize> = double.iter().copied().collect();
    let diff = union.symmetric_difference(&double_set).next().map(|&p| vec![p]);
    checks.push(set_check(PairProperty::DoubleBall, diff));

    let mut bad = None;
    'outer: for (side, centre_ball) in [(&ca, &ca), (&cb, &cb)] {
        for &p in side.iter() {
            if closure_with(x, p, d, eta) != *centre_ball {
                bad = Some(vec![p]);
                break 'outer;
            }
        }
    }
    checks.push(set_check(PairProperty::ComponentBalls, bad));

    let iota = |p: usize| nm.get(p).expect("point in the domain");
    let mut fixed = Worst::new();
    for p in nm.domain() {
        fixed.see((x.d(p, iota(p)) - d).abs(), &[p, iota(p)]);
    }
    checks.push(fixed.into_check(PairProperty::FixedDistance));

    let mut cross = Worst::new();
    for &p in &nm.side_a {
        for &z in &nm.side_b {
            cross.see((x.d(p, z) - d - x.d(iota(p), z)).abs(), &[p, z]);
        }
    }
    checks.push(cross.into_check(PairProperty::CrossDistance));

    let back = nm.domain().find(|&p| iota(iota(p)) != p).map(|p| vec![p, iota(p), iota(iota(p))]);
    checks.push(set_check(PairProperty::Involution, back));

    let dom: Vec<usize> = nm.domain().collect();
    let mut iso = Worst::new();
    for (k, &p) in dom.iter().enumerate() {
        for &q in &dom[k + 1..] {
            iso.see((x.d(iota(p), iota(q)) - x.d(p, q)).abs(), &[p, q]);
        }
    }
    checks.push(iso.into_check(PairProperty::Isometry));

    let all_hold = checks.iter().all(|c| c.holds);
    Ok(PropertyReport {
        pair: pair.clone(),
        checks,
        ties: nm.ties,
        all_hold,
    })
}

/// A pair `(a, b′)` with `d(a,b′) = 2d`, taking the lowest admissible index;
/// `None` once the sample runs out.
pub fn double_pair(x: &FiniteMMS, pair: &PairCertificate) -> Result<Option<PairCertificate>> {
    check_pair(x, pair)?;
    let target = 2.0 * pair.d;
    let near = sorted_near(x, pair.a, 2.0 * target + TIE_TOL);
    let mut candidates: Vec<usize> = near
        .iter()
        .filter(|p| (p.0 - target).abs() <= TIE_TOL)
        .map(|p| p.1)
        .collect();
    candidates.sort_unstable();
    Ok(candidates.into_iter().find_map(|b| certify_from(x, &near, pair.a, b)))
}

/// The pairs at `d, 2d, …, 2^{levels−1} d` obtained by repeated doubling.
pub fn doubling_chain(x: &FiniteMMS, pair: &PairCertificate, levels: usize) -> Result<Vec<PairCertificate>> {
    let mut chain = vec![pair.clone()];
    while chain.len() < levels {
        match double_pair(x, chain.last().expect("non-empty"))? {
            Some(next) => chain.push(next),
            None => return Err(Error::DoublingExhausted { levels: chain.len() }),
        }
    }
    Ok(chain)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCoordinate {
    pub point: usize,
    /// Point of `C(a,d)` this one folds onto.
    pub base_point: usize,
    /// Bit `i` of the binary factor, lowest first.
    pub bits: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCoordinates {
    pub levels: usize,
    pub chain: Vec<PairCertificate>,
    pub coordinates: Vec<PointCoordinate>,
    /// `max |d(p,q) − d(p̄,q̄) − d Σ 2^i |s_i − t_i||` over the domain.
    pub defect: f64,
    pub defect_witness: Option<(usize, usize)>,
}

pub const MAX_PRODUCT_LEVELS: usize = 62;

/// Coordinates on `C(a, 2^levels d)` as `C(a,d) × {0,1}^levels`, built by
/// folding each doubled half onto the previous one.
pub fn product_coordinates(x: &FiniteMMS, pair: &PairCertificate, levels: usize) -> Result<ProductCoordinates> {
    check_pair(x, pair)?;
    if levels == 0 || levels > MAX_PRODUCT_LEVELS {
        return Err(Error::arg(format!("levels must be in 1..={MAX_PRODUCT_LEVELS}")));
    }
    let chain = doubling_chain(x, pair, levels)?;
    let eta = closure_resolution(x, pair.d);
    let mut coord: HashMap<usize, (usize, u64)> = closure_with(x, pair.a, pair.d, eta)
        .into_iter()
        .map(|p| (p, (p, 0)))
        .collect();
    for (j, link) in chain.iter().enumerate() {
        let nm = neighbor_map_with(x, link, eta.min(closure_resolution(x, link.d)))?;
        for &y in &nm.side_b {
            let src = nm.get(y).expect("side_b is in the domain");
            let &(base, bits) = coord.get(&src).ok_or_else(|| {
                Error::HypothesisUnmet(format!("fold at level {j} lands outside the known domain at point {src}"))
            })?;
            coord.insert(y, (base, bits | 1 << j));
        }
    }
    let mut pts: Vec<(usize, usize, u64)> = coord.into_iter().map(|(p, (b, s))| (p, b, s)).collect();
    pts.sort_unstable();
    let mut defect = 0.0f64;
    let mut defect_witness = None;
    for (k, &(p, pb, ps)) in pts.iter().enumerate() {
        for &(q, qb, qs) in &pts[k + 1..] {
            let model = x.d(pb, qb) + pair.d * (ps ^ qs) as f64;
            let err = (x.d(p, q) - model).abs();
            if err > defect {
                defect = err;
                defect_witness = Some((p, q));
            }
        }
    }
    let coordinates = pts
        .into_iter()
        .map(|(point, base_point, bits)| PointCoordinate {
            point,
            base_point,
            bits: (0..levels).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect(),
        })
        .collect();
    Ok(ProductCoordinates {
        levels,
        chain,
        coordinates,
        defect,
        defect_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::{make_r_grid, make_s, make_star_sn, make_t, STruncationSpec, TTruncationSpec};

    fn s(m: i32, n: i32) -> FiniteMMS {
        make_s(STruncationSpec { m, n }).unwrap().space
    }

    fn t(cp: u32, levels: u32) -> FiniteMMS {
        make_t(TTruncationSpec {
            circle_points: cp,
            m: 0,
            n_levels: levels,
        })
        .unwrap()
        .space
    }

    fn cert(x: &FiniteMMS, a: usize, b: usize) -> PairCertificate {
        let margin = is_besicovitch_pair(x, a, b).unwrap();
        assert!(margin >= -PAIR_TOL);
        PairCertificate { a, b, d: x.d(a, b), margin }
    }

    #[test]
    fn margins_of_basic_pairs() {
        assert_eq!(is_besicovitch_pair(&s(0, 8), 0, 1).unwrap(), 0.0);
        assert_eq!(is_besicovitch_pair(&make_star_sn(3).unwrap().space, 0, 1).unwrap(), 0.0);
        let g = make_r_grid(0.1, 1.0).unwrap().space;
        // Neighbours on the grid are a pair at the sample resolution only.
        assert!(is_besicovitch_pair(&g, 3, 4).unwrap().abs() < 1e-12);
        for b in 5..g.n() {
            assert!(is_besicovitch_pair(&g, 3, b).unwrap() < 0.0);
        }
        assert!(is_besicovitch_pair(&g, 3, 3).is_err());
    }

    #[test]
    fn pair_lists() {
        let ds: BTreeSet<u64> = find_pairs(&s(0, 4), 16.0).unwrap().iter().map(|p| p.d as u64).collect();
        for d in [1, 2, 4, 8] {
            assert!(ds.contains(&d));
        }
        let g = make_r_grid(0.1, 1.0).unwrap().space;
        let above = find_pairs_with(&g, &PairSearch { min_d: 0.1, max_d: 2.0, anchors: None }).unwrap();
        assert!(above.is_empty());
        let tt = t(16, 1);
        let first = &find_pairs_with(&tt, &PairSearch { min_d: 0.125, max_d: 4.0, anchors: None }).unwrap()[0];
        assert_eq!(first.d, 1.0);
        assert_eq!(tt.d(first.a, first.b), 1.0);
    }

    #[test]
    fn smallest_pairs() {
        assert_eq!(min_pair_distance(&t(16, 2), 0.25).unwrap(), Some(1.0));
        assert_eq!(min_pair_distance(&s(-2, 3), 0.0).unwrap(), Some(0.25));
        assert_eq!(min_pair_distance(&s(-2, 3), 0.25).unwrap(), Some(0.5));
        let g = make_r_grid(0.1, 1.0).unwrap().space;
        assert_eq!(min_pair_distance(&g, 0.1).unwrap(), None);
    }

    #[test]
    fn neighbour_map_on_s() {
        let x = s(0, 8);
        let nm = neighbor_map(&x, &cert(&x, 0, 1)).unwrap();
        assert_eq!(nm.get(0), Some(1));
        assert_eq!(nm.get(1), Some(0));
        // d = 2 pair on a finer truncation: ι flips coordinate 1.
        let y = s(-2, 8);
        let e1 = 1 << 3;
        let nm = neighbor_map(&y, &cert(&y, 0, e1)).unwrap();
        for p in nm.domain() {
            assert_eq!(nm.get(p), Some(p ^ e1));
        }
        assert!(nm.ties.is_empty());
    }

    #[test]
    fn properties_hold_on_models() {
        let x = s(0, 6);
        for k in 0..6 {
            let rep = verify_pair_properties(&x, &cert(&x, 0, 1 << k)).unwrap();
            assert!(rep.all_hold, "{rep:?}");
        }
        let tt = t(16, 2);
        let rep = verify_pair_properties(&tt, &cert(&tt, 0, 16)).unwrap();
        assert!(rep.all_hold, "{rep:?}");
    }

    #[test]
    fn perturbed_space_breaks_cross_distance() {
        let x = s(0, 1);
        let mut t = x.dense();
        t[3] -= 0.05;
        t[3 * 4] -= 0.05;
        let y = FiniteMMS::from_flat_table_unchecked(4, t, vec![1.0; 4]).unwrap();
        y.check_metric().unwrap();
        let rep = verify_pair_properties(&y, &cert(&y, 0, 2)).unwrap();
        let c = rep.check(PairProperty::CrossDistance);
        assert!(!c.holds);
        assert_eq!(c.witness, Some(vec![0, 3]));
        assert!(!rep.all_hold);
    }

    #[test]
    fn doubling_chains() {
        let x = s(0, 8);
        let mut p = cert(&x, 0, 1);
        let next = double_pair(&x, &p).unwrap().unwrap();
        assert_eq!((next.b, next.d), (2, 2.0));
        let mut ds = vec![];
        while let Some(q) = double_pair(&x, &p).unwrap() {
            ds.push(q.d);
            p = q;
        }
        assert_eq!(ds, (1..=8).map(|k| 2f64.powi(k)).collect::<Vec<_>>());
        let tt = t(16, 2);
        let next = double_pair(&tt, &cert(&tt, 0, 16)).unwrap().unwrap();
        assert_eq!((next.b, next.d), (32, 2.0));
    }

    #[test]
    fn product_coordinates_are_exact_on_s() {
        for k in 1..6 {
            let x = s(0, k);
            let pc = product_coordinates(&x, &cert(&x, 0, 1), k as usize).unwrap();
            assert_eq!(pc.defect, 0.0);
            assert_eq!(pc.coordinates.len(), 1 << k);
        }
        let x = s(0, 3);
        let err = product_coordinates(&x, &cert(&x, 0, 1), 6).unwrap_err();
        assert_eq!(err, Error::DoublingExhausted { levels: 4 });
        let tt = t(16, 2);
        let pc = product_coordinates(&tt, &cert(&tt, 0, 16), 2).unwrap();
        assert!(pc.defect <= 2.0 / 16.0);
        assert_eq!(pc.coordinates.len(), 64);
    }
}
