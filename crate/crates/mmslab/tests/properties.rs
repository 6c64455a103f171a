use mmslab::dstar::{dstar_estimate, UpperConfig};
use mmslab::geoprobe::{covering_number, dilation_identity_sides};
use mmslab::lip_dual::{f_lr, f_lr_oracle, f_x, LipschitzDualProblem};
use mmslab::mms_core::{
    ball_points, from_json, glue, glue_pointed, rescale, to_json, Ball, Correspondence, FiniteMMS, PointedMMS,
};
use mmslab::model_spaces::{heisenberg::HeisenbergPoint, make_s, scale_space, STruncationSpec};
use proptest::prelude::*;

/// Points of the `ℓ₁` plane on a quarter grid, so distances are exact.
fn plane_space(max: usize) -> impl Strategy<Value = FiniteMMS> {
    prop::collection::vec((-16i32..16, -16i32..16, 1u32..8), 1..=max).prop_map(|pts| {
        let dist = pts
            .iter()
            .map(|p| {
                pts.iter()
                    .map(|q| ((p.0 - q.0).abs() + (p.1 - q.1).abs()) as f64 / 4.0)
                    .collect()
            })
            .collect();
        let weight = pts.iter().map(|p| p.2 as f64 / 8.0).collect();
        FiniteMMS::from_table(dist, weight).unwrap()
    })
}

fn pointed(max: usize) -> impl Strategy<Value = PointedMMS> {
    plane_space(max).prop_flat_map(|x| {
        let n = x.n();
        (Just(x), 0..n).prop_map(|(x, b)| PointedMMS::new(x, b).unwrap())
    })
}

fn pair_of_spaces(max: usize) -> impl Strategy<Value = (PointedMMS, PointedMMS, Vec<(usize, usize)>)> {
    (pointed(max), pointed(max)).prop_flat_map(|(x, y)| {
        let (nx, ny) = (x.space.n(), y.space.n());
        let pairs = prop::collection::vec((0..nx, 0..ny), 0..4);
        (Just(x), Just(y), pairs)
    })
}

fn check_metric_axioms(x: &FiniteMMS) {
    let n = x.n();
    for i in 0..n {
        assert_eq!(x.d(i, i), 0.0);
        for j in 0..n {
            assert_eq!(x.d(i, j), x.d(j, i));
            for k in 0..n {
                assert!(x.d(i, k) <= x.d(i, j) + x.d(j, k) + 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_oracle(
        x in plane_space(4),
        l in 0.1f64..6.0,
        r in 0.1f64..6.0,
        seed in prop::collection::vec(-1.0f64..1.0, 4),
        b in 0usize..4,
    ) {
        let n = x.n();
        let p = LipschitzDualProblem {
            base: b % n,
            lipschitz: l,
            radius: r,
            signed_mass: seed[..n].to_vec(),
            space: x,
        };
        let a = f_lr(&p).unwrap();
        let o = f_lr_oracle(&p).unwrap();
        prop_assert!((a.value - o).abs() <= 1e-7, "{} vs {}", a.value, o);
        let g: f64 = a.witness.iter().zip(&p.signed_mass).map(|(g, m)| g * m).sum();
        prop_assert!((g - a.value).abs() <= 1e-8);
    }

    #[test]
    fn fx_is_in_range(x in plane_space(8), mu in prop::collection::vec(0.0f64..1.0, 8), nu in prop::collection::vec(0.0f64..1.0, 8)) {
        let n = x.n();
        let v = f_x(&x, 0, &mu[..n], &nu[..n]).unwrap();
        prop_assert!((0.0..=0.5).contains(&v));
        prop_assert!(f_x(&x, 0, &mu[..n], &mu[..n]).unwrap() <= 1e-9);
    }

    #[test]
    fn gluings_are_metric((x, y, extra) in pair_of_spaces(6)) {
        let mut corr = Correspondence::base_only(&x, &y, 0.0);
        corr.pairs.extend(extra);
        corr.slack = corr.minimal_slack(&x.space, &y.space);
        let g = glue(&x, &y, &corr).unwrap();
        check_metric_axioms(&g.space);
        // Side distances are kept exactly.
        for i in 0..x.space.n() {
            for j in 0..x.space.n() {
                prop_assert_eq!(g.space.d(g.map_x[i], g.map_x[j]), x.space.d(i, j));
            }
        }
        // Cross distances never drop below what the matched pairs force,
        // up to the slack between partners.
        for u in 0..x.space.n() {
            for v in 0..y.space.n() {
                let d = g.space.d(g.map_x[u], g.map_y[v]);
                for &(p, q) in &corr.pairs {
                    prop_assert!(d + corr.slack + 1e-9 >= (x.space.d(u, p) - y.space.d(q, v)).abs());
                }
            }
        }
        corr.slack = corr.minimal_pointed_slack(&x, &y);
        let g = glue_pointed(&x, &y, &corr).unwrap();
        check_metric_axioms(&g.space);
        prop_assert_eq!(g.space.d(g.map_x[x.base], g.map_y[y.base]), 0.0);
    }

    #[test]
    fn dstar_bounds_are_ordered((x, y, _) in pair_of_spaces(6)) {
        let est = dstar_estimate(&x, &y, &UpperConfig { search_budget: 2, ..UpperConfig::default() }).unwrap();
        prop_assert!(est.lower <= est.upper + 1e-9);
        prop_assert!(est.upper <= 0.5);
        let same = dstar_estimate(&x, &x, &UpperConfig::default()).unwrap();
        prop_assert!(same.upper <= 1e-9);
    }

    #[test]
    fn balls_grow_with_the_radius(x in plane_space(10), c in 0usize..10, r in 0.0f64..8.0, dr in 0.0f64..4.0) {
        let c = c % x.n();
        let small = ball_points(&x, &Ball::closed(c, r)).unwrap();
        let big = ball_points(&x, &Ball::closed(c, r + dr)).unwrap();
        let open = ball_points(&x, &Ball::open(c, r)).unwrap();
        prop_assert!(small.iter().all(|i| big.contains(i)));
        prop_assert!(open.iter().all(|i| small.contains(i)));
    }

    #[test]
    fn rescaling_composes(p in pointed(10), a in 0.5f64..8.0, b in 0.5f64..8.0) {
        // Mass normalisation needs the open ball to be non-empty, which the base guarantees.
        let once = rescale(&rescale(&p, a).unwrap(), b).unwrap();
        let twice = rescale(&p, a * b).unwrap();
        for i in 0..p.space.n() {
            for j in 0..p.space.n() {
                prop_assert!((once.space.d(i, j) - twice.space.d(i, j)).abs() <= 1e-12 * (1.0 + twice.space.d(i, j)));
            }
            prop_assert!((once.space.weight(i) - twice.space.weight(i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn cover_number_falls_with_the_radius(x in plane_space(10), c in 0usize..10, r in 0.5f64..6.0) {
        let b = Ball::closed(c % x.n(), r);
        let mut last = usize::MAX;
        for k in 1..=4 {
            let rep = covering_number(&x, &b, r * k as f64 / 4.0).unwrap();
            let e = rep.exact.unwrap();
            prop_assert!(e <= last);
            last = e;
        }
    }

    #[test]
    fn json_round_trip(x in plane_space(8)) {
        let (back, _) = from_json(&to_json(&x, Some(0))).unwrap();
        for i in 0..x.n() {
            prop_assert_eq!(back.weight(i).to_bits(), x.weight(i).to_bits());
            for j in 0..x.n() {
                prop_assert_eq!(back.d(i, j).to_bits(), x.d(i, j).to_bits());
            }
        }
    }

    #[test]
    fn scaling_composes(x in plane_space(8), a in 0.25f64..4.0, b in 0.25f64..4.0) {
        let ab = scale_space(&scale_space(&x, a).unwrap(), b).unwrap();
        let direct = scale_space(&x, a * b).unwrap();
        for i in 0..x.n() {
            for j in 0..x.n() {
                prop_assert!((ab.d(i, j) - direct.d(i, j)).abs() <= 1e-12 * (1.0 + direct.d(i, j)));
            }
        }
    }

    #[test]
    fn dilation_identity(x in -3.0f64..3.0, y in -3.0f64..3.0, t in -6.0f64..6.0, m in -8i32..8, n in -8i32..8) {
        prop_assume!(m != n);
        let (lhs, rhs) = dilation_identity_sides(&HeisenbergPoint::new(x, y, t), 2f64.powi(m), 2f64.powi(n));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
    }

    #[test]
    fn dyadic_flips_are_isometries(m in -3i32..1, k in 0usize..64) {
        let s = make_s(STruncationSpec { m, n: m + 5 }).unwrap().space;
        let k = k % s.n();
        // XOR with k maps the base to k and preserves every distance.
        for i in 0..s.n() {
            for j in 0..s.n() {
                prop_assert_eq!(s.d(i ^ k, j ^ k), s.d(i, j));
            }
            prop_assert_eq!(s.weight(i ^ k), s.weight(i));
        }
    }
}
