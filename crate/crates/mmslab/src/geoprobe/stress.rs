use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::FiniteMMS;

pub const MAX_STRESS_POINTS: usize = 50;
pub const MAX_STRESS_DIM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    P(f64),
    Inf,
}

impl Norm {
    pub fn from_exponent(p: f64) -> Result<Norm> {
        if p.is_infinite() && p > 0.0 {
            Ok(Norm::Inf)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Norm::P(p))
        } else {
            Err(Error::arg("norm exponent must lie in [1, inf]"))
        }
    }

    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Norm::Inf => a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
            Norm::P(1.0) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::P(2.0) => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Norm::P(p) => a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressResult {
    pub p: Norm,
    pub dim: usize,
    pub best_stress: f64,
    pub config: Vec<Vec<f64>>,
    pub restarts: usize,
    pub seed: u64,
}

/// Maximum relative distance error of a configuration.
pub fn stress_of(x: &FiniteMMS, config: &[Vec<f64>], norm: Norm) -> f64 {
    let n = x.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = x.d(i, j);
            let e = norm.dist(&config[i], &config[j]);
            let rel = if d > 0.0 { (e - d).abs() / d } else { e };
            worst = worst.max(rel);
        }
    }
    worst
}

/// Classical scaling truncated to `dim` coordinates (power iteration on the
/// double-centred squared distances).
fn classical_mds(x: &FiniteMMS, dim: usize) -> Vec<Vec<f64>> {
    let n = x.n();
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * x.d(i, j).powi(2);
        }
    }
    let row: Vec<f64> = (0..n).map(|i| b[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let all = row.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] += all - row[i] - row[j];
        }
    }
    let mut coords = vec![vec![0.0; dim]; n];
    for k in 0..dim.min(n) {
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i * (k + 3)) as f64 % 7.0).collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| b[i * n + j] * v[j]).sum()).collect();
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            lambda = w.iter().zip(&v).map(|(a, c)| a * c).sum::<f64>();
            v = w.into_iter().map(|a| a / norm).collect();
        }
        if lambda <= 0.0 {
            break;
        }
        let s = lambda.sqrt();
        for i in 0..n {
            coords[i][k] = v[i] * s;
        }
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] -= lambda * v[i] * v[j];
            }
        }
    }
    coords
}

/// Each point on its own axis at its distance from point 0.
fn radial_start(x: &FiniteMMS, dim: usize) -> Vec<Vec<f64>> {
    (0..x.n())
        .map(|i| {
            let mut c = vec![0.0; dim];
            if i > 0 {
                c[(i - 1) % dim] = x.d(0, i);
            }
            c
        })
        .collect()
}

/// Compass search on the exact objective with a shrinking step.
fn polish(x: &FiniteMMS, mut cfg: Vec<Vec<f64>>, norm: Norm, scale: f64) -> (f64, Vec<Vec<f64>>) {
    let mut best = stress_of(x, &cfg, norm);
    let mut step = 0.1 * scale;
    let floor = 1e-12 * scale.max(1.0);
    while step > floor && best > 0.0 {
        let mut improved = false;
        for i in 0..cfg.len() {
            for k in 0..cfg[i].len() {
                for s in [step, -step] {
                    cfg[i][k] += s;
                    let v = stress_of(x, &cfg, norm);
                    if v < best {
                        best = v;
                        improved = true;
                    } else {
                        cfg[i][k] -= s;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, cfg)
}

/// Smoothed minimax descent: soft-max of squared relative errors.
fn smooth_descent(x: &FiniteMMS, mut cfg: Vec<Vec<f64>>, norm: Norm, scale: f64) -> Vec<Vec<f64>> {
    let n = x.n();
    let dim = cfg[0].len();
    let h = 1e-7 * scale.max(1.0);
    let objective = |c: &[Vec<f64>], beta: f64| -> f64 {
        let mut terms = Vec::with_capacity(n * n / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = x.d(i, j);
                if d > 0.0 {
                    let r = norm.dist(&c[i], &c[j]) / d - 1.0;
                    terms.push(beta * r * r);
                }
            }
        }
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return 0.0;
        }
        (m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()) / beta
    };
    let mut lr = 0.05 * scale;
    for beta in [10.0, 100.0, 1000.0] {
        let mut f = objective(&cfg, beta);
        for _ in 0..300 {
            let mut grad = vec![vec![0.0; dim]; n];
            for i in 0..n {
                for k in 0..dim {
                    cfg[i][k] += h;
                    let up = objective(&cfg, beta);
                    cfg[i][k] -= 2.0 * h;
                    let down = objective(&cfg, beta);
                    cfg[i][k] += h;
                    grad[i][k] = (up - down) / (2.0 * h);
                }
            }
            let gnorm = grad.iter().flatten().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-14 {
                break;
            }
            loop {
                let trial: Vec<Vec<f64>> = cfg
                    .iter()
                    .zip(&grad)
                    .map(|(c, g)| c.iter().zip(g).map(|(a, b)| a - lr * b / gnorm).collect())
                    .collect();
                let ft = objective(&trial, beta);
                if ft < f {
                    cfg = trial;
                    f = ft;
                    lr *= 1.2;
                    break;
                }
                lr *= 0.5;
                if lr < 1e-12 * scale {
                    break;
                }
            }
            if lr < 1e-12 * scale {
                lr = 1e-3 * scale;
                break;
            }
        }
    }
    cfg
}

/// Multistart minimisation of the maximum relative distortion into `ℓ_p^dim`.
///
/// Restart 0 is classical scaling, restart 1 the radial start about point 0;
/// the rest are seeded random configurations.
pub fn lp_embed_stress(x: &FiniteMMS, p: f64, dim: usize, restarts: usize, seed: u64) -> Result<StressResult> {
    let norm = Norm::from_exponent(p)?;
    if dim == 0 || dim > MAX_STRESS_DIM {
        return Err(Error::arg(format!("dim must be in 1..={MAX_STRESS_DIM}")));
    }
    if x.n() > MAX_STRESS_POINTS {
        return Err(Error::SizeGuard {
            what: "stress point count",
            got: x.n() as u64,
            limit: MAX_STRESS_POINTS as u64,
        });
    }
    let restarts = restarts.max(1);
    let scale = x.diameter().max(f64::MIN_POSITIVE);
    let run = |r: usize| -> (f64, Vec<Vec<f64>>) {
        let start = match r {
            0 => classical_mds(x, dim),
            1 => radial_start(x, dim),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(r as u64));
                (0..x.n())
                    .map(|_| (0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
                    .collect()
            }
        };
        let s0 = stress_of(x, &start, norm);
        if s0 == 0.0 {
            return (0.0, start);
        }
        let smoothed = smooth_descent(x, start, norm, scale);
        polish(x, smoothed, norm, scale)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<(f64, Vec<Vec<f64>>)> = {
        use rayon::prelude::*;
        (0..restarts).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(f64, Vec<Vec<f64>>)> = (0..restarts).map(run).collect();
    let (best_stress, config) = results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart");
    Ok(StressResult {
        p: norm,
        dim,
        best_stress,
        config,
        restarts,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::make_star_sn;

    #[test]
    fn path_embeds_on_a_line() {
        let path = FiniteMMS::from_table(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            vec![1.0; 3],
        )
        .unwrap();
        let r = lp_embed_stress(&path, 2.0, 1, 4, 0).unwrap();
        assert!(r.best_stress <= 1e-6);
    }

    #[test]
    fn stars_embed_in_l1() {
        for n in 1..=6u32 {
            let s = make_star_sn(n).unwrap().space;
            let r = lp_embed_stress(&s, 1.0, n as usize, 2, 0).unwrap();
            assert!(r.best_stress <= 1e-6, "n = {n}: {}", r.best_stress);
        }
    }

    #[test]
    fn three_arm_star_in_the_plane() {
        // Constrained minimax stress from an SLSQP run with 400 restarts.
        const ORACLE: f64 = 0.054_960_033_164;
        let s = make_star_sn(3).unwrap().space;
        let line = lp_embed_stress(&s, 2.0, 1, 20, 0).unwrap();
        assert!((line.best_stress - 0.2).abs() < 1e-6);
        let plane = lp_embed_stress(&s, 2.0, 2, 100, 0).unwrap();
        assert!(plane.best_stress >= ORACLE - 1e-9);
        assert!(plane.best_stress - ORACLE < 1e-6, "{}", plane.best_stress);
    }

    #[test]
    fn deterministic_under_seed() {
        let s = make_star_sn(3).unwrap().space;
        let a = lp_embed_stress(&s, 2.0, 3, 6, 11).unwrap();
        let b = lp_embed_stress(&s, 2.0, 3, 6, 11).unwrap();
        assert_eq!(a, b);
    }
}
