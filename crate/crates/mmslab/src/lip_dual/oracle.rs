//! Vertex enumeration for tiny instances, used to cross-check the flow solver.

use super::{caps, LipschitzDualProblem};
use crate::error::{Error, Result};

pub const ORACLE_MAX_POINTS: usize = 4;

/// One inequality `coef · g ≤ rhs`.
struct Row {
    coef: Vec<f64>,
    rhs: f64,
}

fn constraint_rows(p: &LipschitzDualProblem) -> Vec<Row> {
    let n = p.space.n();
    let c = caps(&p.space, p.base, p.lipschitz, p.radius);
    let mut rows = Vec::new();
    let unit = |i: usize, s: f64| {
        let mut v = vec![0.0; n];
        v[i] = s;
        v
    };
    for i in 0..n {
        rows.push(Row { coef: unit(i, 1.0), rhs: c[i] });
        rows.push(Row { coef: unit(i, -1.0), rhs: c[i] });
        for j in (i + 1)..n {
            let bound = p.lipschitz * p.space.d(i, j);
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v[j] = -1.0;
            rows.push(Row { coef: v.clone(), rhs: bound });
            rows.push(Row { coef: v.iter().map(|x| -x).collect(), rhs: bound });
        }
    }
    rows
}

/// Solves the square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..m {
        cur.push(i);
        combinations(m, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Exact optimum of a problem with at most four points.
pub fn f_lr_oracle(p: &LipschitzDualProblem) -> Result<f64> {
    p.validate()?;
    let n = p.space.n();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::SizeGuard {
            what: "oracle instance size",
            got: n as u64,
            limit: ORACLE_MAX_POINTS as u64,
        });
    }
    let rows = constraint_rows(p);
    let mut best = f64::NEG_INFINITY;
    combinations(rows.len(), n, 0, &mut Vec::new(), &mut |pick: &[usize]| {
        let a = pick.iter().map(|&r| rows[r].coef.clone()).collect();
        let b = pick.iter().map(|&r| rows[r].rhs).collect();
        if let Some(g) = solve_square(a, b) {
            let feasible = rows.iter().all(|row| {
                row.coef.iter().zip(&g).map(|(c, x)| c * x).sum::<f64>() <= row.rhs + 1e-9
            });
            if feasible {
                let v: f64 = g.iter().zip(&p.signed_mass).map(|(x, m)| x * m).sum();
                best = best.max(v);
            }
        }
    });
    // The origin is always feasible; it is a vertex only in degenerate cases.
    Ok(best.max(0.0))
}
