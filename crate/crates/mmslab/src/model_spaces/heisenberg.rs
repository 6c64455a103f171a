//! The first Heisenberg group with the Korányi gauge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mms_core::{FiniteMMS, Metric, PointedMMS};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct HeisenbergPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HeisenbergPoint {
    pub const IDENTITY: HeisenbergPoint = HeisenbergPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub fn new(x: f64, y: f64, t: f64) -> Self {
        HeisenbergPoint { x, y, t }
    }

    /// Group law `(x+x', y+y', t+t'+2(xy'−x'y))`.
    pub fn mul(&self, o: &HeisenbergPoint) -> HeisenbergPoint {
        HeisenbergPoint {
            x: self.x + o.x,
            y: self.y + o.y,
            t: self.t + o.t + 2.0 * (self.x * o.y - o.x * self.y),
        }
    }

    pub fn inv(&self) -> HeisenbergPoint {
        HeisenbergPoint {
            x: -self.x,
            y: -self.y,
            t: -self.t,
        }
    }

    pub fn dilate(&self, lambda: f64) -> HeisenbergPoint {
        HeisenbergPoint {
            x: lambda * self.x,
            y: lambda * self.y,
            t: lambda * lambda * self.t,
        }
    }

    /// `((x²+y²)² + t²)^{1/4}`
    pub fn koranyi_norm(&self) -> f64 {
        let r2 = self.x * self.x + self.y * self.y;
        (r2 * r2 + self.t * self.t).sqrt().sqrt()
    }

    pub fn distance(&self, o: &HeisenbergPoint) -> f64 {
        self.inv().mul(o).koranyi_norm()
    }
}

pub fn heisenberg_mul(a: &HeisenbergPoint, b: &HeisenbergPoint) -> HeisenbergPoint {
    a.mul(b)
}

pub fn heisenberg_inv(a: &HeisenbergPoint) -> HeisenbergPoint {
    a.inv()
}

pub fn heisenberg_dilate(a: &HeisenbergPoint, lambda: f64) -> HeisenbergPoint {
    a.dilate(lambda)
}

pub fn koranyi_norm(a: &HeisenbergPoint) -> f64 {
    a.koranyi_norm()
}

/// Draws a point uniformly from the bounding box of the gauge ball and keeps it
/// once it lands inside.
pub(crate) fn sample_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> HeisenbergPoint {
    loop {
        let p = HeisenbergPoint {
            x: rng.gen_range(-radius..=radius),
            y: rng.gen_range(-radius..=radius),
            t: rng.gen_range(-radius * radius..=radius * radius),
        };
        if p.koranyi_norm() <= radius {
            return p;
        }
    }
}

pub const MAX_HEISENBERG_SAMPLE: usize = 5000;

/// `k` points in the gauge ball of `radius`; the identity is point 0 and the base.
pub fn make_heisenberg_sample(k: usize, radius: f64, seed: u64) -> Result<PointedMMS> {
    if k == 0 {
        return Err(Error::arg("sample needs at least one point"));
    }
    if k > MAX_HEISENBERG_SAMPLE {
        return Err(Error::SizeGuard {
            what: "heisenberg sample size",
            got: k as u64,
            limit: MAX_HEISENBERG_SAMPLE as u64,
        });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::arg("radius must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![HeisenbergPoint::IDENTITY];
    pts.extend((1..k).map(|_| sample_in_ball(&mut rng, radius)));
    let space = FiniteMMS::from_metric(Metric::Heisenberg(pts), vec![1.0; k])?;
    PointedMMS::new(space, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cancels() {
        let a = HeisenbergPoint::new(0.3, -1.2, 2.5);
        assert_eq!(a.mul(&a.inv()), HeisenbergPoint::IDENTITY);
    }

    #[test]
    fn unit_horizontal_norm() {
        assert_eq!(HeisenbergPoint::new(1.0, 0.0, 0.0).koranyi_norm(), 1.0);
    }

    #[test]
    fn dilation_scales_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = sample_in_ball(&mut rng, 3.0);
            let b = sample_in_ball(&mut rng, 3.0);
            let lhs = a.dilate(2.0).distance(&b.dilate(2.0));
            let rhs = 2.0 * a.distance(&b);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn sample_is_deterministic() {
        let a = make_heisenberg_sample(20, 1.0, 3).unwrap();
        let b = make_heisenberg_sample(20, 1.0, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.space.d(0, 0), 0.0);
    }
}
