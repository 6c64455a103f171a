use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_spaces::heisenberg::{sample_in_ball, HeisenbergPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub samples: usize,
    pub max_relative_error: f64,
    pub worst_point: HeisenbergPoint,
    pub worst_exponents: (i32, i32),
}

/// Both sides of `‖δ_λ(a)⁻¹⋆δ_μ(a)‖ = |μ−λ|·‖(x, y, (μ+λ)/(μ−λ)·t)‖`.
pub fn dilation_identity_sides(a: &HeisenbergPoint, lambda: f64, mu: f64) -> (f64, f64) {
    let lhs = a.dilate(lambda).inv().mul(&a.dilate(mu)).koranyi_norm();
    if lambda == mu {
        return (lhs, 0.0);
    }
    let c = (mu + lambda) / (mu - lambda);
    let rhs = (mu - lambda).abs() * HeisenbergPoint::new(a.x, a.y, c * a.t).koranyi_norm();
    (lhs, rhs)
}

/// Evaluates the dilation identity on seeded random points and dyadic
/// exponent pairs `m ≠ n` in `-6..=6`.
pub fn heisenberg_identity_check(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = IdentityReport {
        samples,
        max_relative_error: 0.0,
        worst_point: HeisenbergPoint::IDENTITY,
        worst_exponents: (0, 0),
    };
    for _ in 0..samples {
        let a = HeisenbergPoint::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-4.0..4.0),
        );
        let m = rng.gen_range(-6..=6);
        let mut n = rng.gen_range(-6..=5);
        if n >= m {
            n += 1;
        }
        let (lhs, rhs) = dilation_identity_sides(&a, 2f64.powi(m), 2f64.powi(n));
        let err = (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE);
        if err > rep.max_relative_error {
            rep.max_relative_error = err;
            rep.worst_point = a;
            rep.worst_exponents = (m, n);
        }
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub constant: f64,
    pub samples: usize,
    /// Exponents `m ≠ n` drawn from this inclusive range.
    pub exponent_range: (i32, i32),
    pub worst_point: HeisenbergPoint,
    pub worst_exponents: (i32, i32),
}

/// `max ‖δ_λ(a)⁻¹⋆δ_μ(a)‖ / (|μ−λ|·‖a‖)` over `‖a‖ ≤ 1` and `λ = 2^m`, `μ = 2^n`.
pub fn heisenberg_growth_constant(samples: usize, exponent_range: (i32, i32), seed: u64) -> Result<GrowthReport> {
    let (lo, hi) = exponent_range;
    if lo < 1 || hi <= lo {
        return Err(Error::arg("exponent range must satisfy 1 <= lo < hi"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = GrowthReport {
        constant: 0.0,
        samples,
        exponent_range,
        worst_point: HeisenbergPoint::IDENTITY,
        worst_exponents: (0, 0),
    };
    let mut done = 0;
    while done < samples {
        let a = sample_in_ball(&mut rng, 1.0);
        let norm = a.koranyi_norm();
        if norm == 0.0 {
            continue;
        }
        done += 1;
        let m = rng.gen_range(lo..=hi);
        let mut n = rng.gen_range(lo..hi);
        if n >= m {
            n += 1;
        }
        let (l, u) = (2f64.powi(m), 2f64.powi(n));
        let (lhs, _) = dilation_identity_sides(&a, l, u);
        let ratio = lhs / ((u - l).abs() * norm);
        if ratio > rep.constant {
            rep.constant = ratio;
            rep.worst_point = a;
            rep.worst_exponents = (m, n);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_points() {
        let a = HeisenbergPoint::new(0.7, -0.2, 0.0);
        let (l, r) = dilation_identity_sides(&a, 2.0, 8.0);
        assert!((l - r).abs() < 1e-14);
        assert!((r - 6.0 * a.koranyi_norm()).abs() < 1e-14);
    }

    #[test]
    fn equal_dilations_vanish() {
        let a = HeisenbergPoint::new(0.7, -0.2, 1.5);
        assert_eq!(dilation_identity_sides(&a, 4.0, 4.0), (0.0, 0.0));
    }

    #[test]
    fn growth_constant_at_least_one_and_stable() {
        let a = heisenberg_growth_constant(4000, (1, 6), 1).unwrap();
        let b = heisenberg_growth_constant(4000, (1, 6), 2).unwrap();
        assert!(a.constant >= 1.0);
        assert!(a.constant <= 2.0);
        assert!((a.constant - b.constant).abs() < 0.05, "{} {}", a.constant, b.constant);
    }
}
