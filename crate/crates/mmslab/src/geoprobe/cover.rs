use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::{ball_points, Ball, FiniteMMS, TIE_TOL};

/// Candidate count up to which the cover number is solved exactly.
pub const EXACT_COVER_CANDIDATES: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    /// Exact minimum when known.
    pub exact: Option<usize>,
    pub upper: usize,
    pub lower: usize,
    pub centers: Vec<usize>,
    pub candidates: usize,
}

type Bits = Vec<u64>;

fn bits_of(len: usize, members: impl Iterator<Item = usize>) -> Bits {
    let mut b = vec![0u64; len.div_ceil(64)];
    for i in members {
        b[i / 64] |= 1 << (i % 64);
    }
    b
}

fn subset_of(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn count(b: &Bits) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}

/// Minimum number of closed `r'`-balls centred at points of `x` covering the ball `b`.
pub fn covering_number(x: &FiniteMMS, b: &Ball, r_small: f64) -> Result<CoverReport> {
    if !(r_small > 0.0) {
        return Err(Error::arg("cover radius must be positive"));
    }
    let pts = ball_points(x, b)?;
    if pts.is_empty() {
        return Ok(CoverReport {
            exact: Some(0),
            upper: 0,
            lower: 0,
            centers: vec![],
            candidates: 0,
        });
    }
    let m = pts.len();
    let covers = |c: usize, p: usize| x.d(c, p) <= r_small + TIE_TOL;

    // Candidates: any point covering something; drop duplicates and dominated sets.
    let mut cands: Vec<(usize, Bits)> = (0..x.n())
        .filter(|&c| x.d(b.center, c) <= b.radius + r_small + 2.0 * TIE_TOL)
        .map(|c| (c, bits_of(m, (0..m).filter(|&k| covers(c, pts[k])))))
        .filter(|(_, s)| count(s) > 0)
        .collect();
    cands.sort_by(|a, b| count(&b.1).cmp(&count(&a.1)).then(a.0.cmp(&b.0)));
    let mut kept: Vec<(usize, Bits)> = Vec::new();
    for (c, s) in cands {
        if !kept.iter().any(|(_, k)| subset_of(&s, k)) {
            kept.push((c, s));
        }
    }

    // Greedy upper bound.
    let full = bits_of(m, 0..m);
    let mut covered = vec![0u64; full.len()];
    let mut greedy = Vec::new();
    while covered != full {
        let (best, _) = kept
            .iter()
            .enumerate()
            .map(|(i, (_, s))| (i, s.iter().zip(&covered).map(|(a, c)| (a & !c).count_ones()).sum::<u32>()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("every point covers itself");
        greedy.push(kept[best].0);
        for (c, s) in covered.iter_mut().zip(&kept[best].1) {
            *c |= s;
        }
    }

    // Lower bound: points pairwise more than 2r' apart need distinct balls.
    let mut sep: Vec<usize> = Vec::new();
    for &p in &pts {
        if sep.iter().all(|&q| x.d(p, q) > 2.0 * r_small + TIE_TOL) {
            sep.push(p);
        }
    }
    // Greedy opens with the largest set, so needing two means no single ball covers.
    let lower = sep.len().max(greedy.len().min(2));

    let exact = if kept.len() <= EXACT_COVER_CANDIDATES {
        let sets: Vec<&Bits> = kept.iter().map(|(_, s)| s).collect();
        let mut best: Vec<usize> = (0..greedy.len()).collect();
        let mut best_len = greedy.len();
        let mut chosen = Vec::new();
        branch(&sets, &full, &mut vec![0u64; full.len()], &mut chosen, &mut best_len, &mut best, lower);
        if best_len < greedy.len() {
            greedy = best.iter().map(|&i| kept[i].0).collect();
        }
        Some(greedy.len())
    } else if lower == greedy.len() {
        Some(lower)
    } else {
        None
    };
    Ok(CoverReport {
        exact,
        upper: greedy.len(),
        lower: exact.unwrap_or(lower),
        centers: greedy,
        candidates: kept.len(),
    })
}

fn branch(
    sets: &[&Bits],
    full: &Bits,
    covered: &mut Bits,
    chosen: &mut Vec<usize>,
    best_len: &mut usize,
    best: &mut Vec<usize>,
    lower: usize,
) {
    let Some(e) = covered
        .iter()
        .zip(full)
        .enumerate()
        .find_map(|(w, (c, f))| {
            let miss = f & !c;
            (miss != 0).then(|| w * 64 + miss.trailing_zeros() as usize)
        })
    else {
        if chosen.len() < *best_len {
            *best_len = chosen.len();
            *best = chosen.clone();
        }
        return;
    };
    if chosen.len() + 1 >= *best_len || *best_len <= lower {
        return;
    }
    for (i, s) in sets.iter().enumerate() {
        if s[e / 64] >> (e % 64) & 1 == 1 {
            let saved = covered.clone();
            for (c, v) in covered.iter_mut().zip(s.iter()) {
                *c |= v;
            }
            chosen.push(i);
            branch(sets, full, covered, chosen, best_len, best, lower);
            chosen.pop();
            *covered = saved;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    /// Largest certified upper bound on the half-radius cover number.
    pub upper: usize,
    /// Largest certified lower bound.
    pub lower: usize,
    pub witness: Option<Ball>,
}

/// Maximum half-radius cover number over the sampled balls.
pub fn doubling_constant(x: &FiniteMMS, balls: &[Ball]) -> Result<DoublingReport> {
    let mut rep = DoublingReport {
        upper: 0,
        lower: 0,
        witness: None,
    };
    for b in balls {
        let c = covering_number(x, b, b.radius / 2.0)?;
        if c.upper > rep.upper {
            rep.upper = c.upper;
            rep.witness = Some(*b);
        }
        rep.lower = rep.lower.max(c.lower);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms_core::restrict;
    use crate::model_spaces::{make_r_grid, make_s, make_spider_midpoints, make_star_sn, STruncationSpec};

    #[test]
    fn spider_midpoints_need_one_ball_each() {
        for n in 2..=8u32 {
            let sp = make_spider_midpoints(n).unwrap();
            let mids: Vec<usize> = (1..=n as usize).collect();
            let only = restrict(&sp, &mids).unwrap();
            let rep = covering_number(&only, &Ball::closed(0, 4.0), 1.0).unwrap();
            assert_eq!(rep.exact, Some(n as usize));
        }
    }

    #[test]
    fn self_cover_is_one() {
        let s = make_s(STruncationSpec { m: 0, n: 4 }).unwrap().space;
        let rep = covering_number(&s, &Ball::closed(0, 4.0), 4.0).unwrap();
        assert_eq!(rep.exact, Some(1));
    }

    #[test]
    fn dyadic_ball_needs_two_halves() {
        // At k = 1 the open ball is two points at distance 1: one ball suffices.
        let s = make_s(STruncationSpec { m: 0, n: 6 }).unwrap().space;
        for k in 2..7 {
            let r = 2f64.powi(k);
            let rep = covering_number(&s, &Ball::open(0, r), r / 2.0).unwrap();
            assert_eq!(rep.exact, Some(2), "r = {r}");
        }
    }

    #[test]
    fn doubling_bounds() {
        let g = make_r_grid(0.1, 5.0).unwrap();
        let balls: Vec<Ball> = [0.5, 1.0, 2.0].iter().map(|&r| Ball::closed(g.base, r)).collect();
        assert!(doubling_constant(&g.space, &balls).unwrap().upper <= 3);
        let st = make_star_sn(5).unwrap();
        let rep = doubling_constant(&st.space, &[Ball::closed(0, 4.0)]).unwrap();
        assert_eq!(rep.upper, 2);
    }
}
