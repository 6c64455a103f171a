//! The acceptance suite: twelve quantitative checks with time limits.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::besicovitch::{
    classify_uniform, default_floor, default_tol, doubling_chain, is_besicovitch_pair, product_coordinates,
    verify_pair_properties, PairCertificate, Verdict as Class,
};
use crate::dstar::{dstar_estimate, dstar_lower_tent, tangent_scan, window, ScanConfig, UpperConfig, Verdict};
use crate::error::Result;
use crate::geoprobe::{
    covering_number, dyadic_radii, heisenberg_identity_check, lp_embed_stress, stride_sample, uniformity_defect,
    uniformity_defect_at,
};
use crate::lip_dual::{f_lr, f_lr_oracle, LipschitzDualProblem};
use crate::mms_core::{rescale, restrict, Ball, FiniteMMS, PointedMMS};
use crate::model_spaces::{
    make_r_grid, make_s, make_spider_midpoints, make_star_sn, make_t, STruncationSpec, TTruncationSpec,
};
use crate::report::Quantity;

pub const CRITERIA: usize = 12;

/// Window radius used around the base for the `d*` checks.
const DSTAR_WINDOW: f64 = 6.0;
/// Grid step of the line in the `d*` checks, after rescaling.
const DSTAR_STEP: f64 = 1.0 / 32.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub values: Vec<(String, Quantity)>,
    pub note: String,
}

impl Outcome {
    /// One line for the pass/fail table.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<34} {:>8.2}s / {:>4.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.limit_seconds,
            self.note
        )
    }
}

struct Check {
    passed: bool,
    values: Vec<(String, Quantity)>,
    note: String,
}

fn spec(id: usize) -> (&'static str, u64) {
    match id {
        1 => ("dyadic space ball masses", 60),
        2 => ("circle-times-binary ball masses", 30),
        3 => ("LP solver against the oracle", 10),
        4 => ("rescaled torus against the line", 300),
        5 => ("rescaled dyadic space is not flat", 120),
        6 => ("pair machinery on the dyadic space", 120),
        7 => ("classification of the models", 180),
        8 => ("five half-radius balls suffice", 120),
        9 => ("spider midpoints need n balls", 10),
        10 => ("star embedding stress", 120),
        11 => ("dilation identity", 5),
        12 => ("tangent scans", 600),
        _ => panic!("no criterion {id}"),
    }
}

/// Runs one criterion and times it. Errors count as failures.
pub fn run(id: usize) -> Outcome {
    let (title, limit) = spec(id);
    let start = Instant::now();
    let check = match id {
        1 => dyadic_uniformity(),
        2 => torus_uniformity(),
        3 => lp_against_oracle(),
        4 => torus_sandwich(),
        5 => dyadic_gap(),
        6 => pair_machinery(),
        7 => classification(),
        8 => five_balls(),
        9 => spider_cover(),
        10 => star_stress(),
        11 => dilation_identity(),
        12 => tangent_scans(),
        _ => unreachable!(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let limit = Duration::from_secs(limit).as_secs_f64();
    let check = check.unwrap_or_else(|e| Check {
        passed: false,
        values: vec![],
        note: format!("error: {e}"),
    });
    let in_time = seconds <= limit;
    Outcome {
        id,
        title: title.to_string(),
        passed: check.passed && in_time,
        seconds,
        limit_seconds: limit,
        values: check.values,
        note: if in_time { check.note } else { format!("over time; {}", check.note) },
    }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=CRITERIA).map(run).collect()
}

fn s(m: i32, n: i32) -> Result<PointedMMS> {
    make_s(STruncationSpec::new(m, n)?)
}

fn t(circle_points: u32, levels: u32) -> Result<PointedMMS> {
    make_t(TTruncationSpec::new(circle_points, 0, levels)?)
}

fn dyadic_uniformity() -> Result<Check> {
    let x = s(-10, 6)?.space;
    let centers = stride_sample(x.n(), 512);
    let radii = dyadic_radii(2f64.powi(-8), 32.0);
    let rep = uniformity_defect_at(&x, &centers, &radii)?;
    let bound = 2f64.powi(-9);
    Ok(Check {
        passed: rep.max_defect <= bound,
        values: vec![("max_defect".into(), Quantity::exact(rep.max_defect))],
        note: format!("defect {:.3e} (bound {bound:.3e})", rep.max_defect),
    })
}

fn torus_uniformity() -> Result<Check> {
    let x = t(256, 4)?.space;
    let radii = dyadic_radii(2f64.powi(-6), 8.0);
    let rep = uniformity_defect(&x, &radii)?;
    let bound = 2.0 / 256.0 + 2f64.powi(-6);
    Ok(Check {
        passed: rep.max_defect <= bound,
        values: vec![("max_defect".into(), Quantity::exact(rep.max_defect))],
        note: format!("defect {:.3e} (bound {bound:.3e})", rep.max_defect),
    })
}

/// A seeded instance on at most four points of the `ℓ₁` plane.
pub fn random_lp_problem(rng: &mut impl Rng, max_points: usize) -> Result<LipschitzDualProblem> {
    let n = rng.gen_range(1..=max_points);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    let dist = pts
        .iter()
        .map(|p| pts.iter().map(|q| (p.0 - q.0).abs() + (p.1 - q.1).abs()).collect())
        .collect();
    let space = FiniteMMS::from_table(dist, vec![1.0; n])?;
    Ok(LipschitzDualProblem {
        space,
        base: rng.gen_range(0..n),
        lipschitz: rng.gen_range(0.1..5.0),
        radius: rng.gen_range(0.1..4.0),
        signed_mass: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    })
}

fn lp_against_oracle() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = random_lp_problem(&mut rng, 4)?;
        let a = f_lr(&p)?.value;
        let b = f_lr_oracle(&p)?;
        worst = worst.max((a - b).abs());
    }
    Ok(Check {
        passed: worst <= 1e-7,
        values: vec![("max_abs_difference".into(), Quantity::exact(worst))],
        note: format!("100 instances, worst difference {worst:.2e}"),
    })
}

fn line() -> Result<PointedMMS> {
    make_r_grid(DSTAR_STEP, DSTAR_WINDOW)
}

fn torus_sandwich() -> Result<Check> {
    let r_line = line()?;
    let mut passed = true;
    let mut values = vec![];
    let mut note = vec![];
    for r in [0.25f64, 0.5, 1.0, 2.0] {
        // Same arc step as the line after rescaling by r.
        let cp = (64.0 / r).round() as u32;
        let levels = ((DSTAR_WINDOW * r).log2().floor() as u32 + 1).max(1);
        let x = window(&rescale(&t(cp, levels)?, r)?, DSTAR_WINDOW)?;
        let est = dstar_estimate(&x, &r_line, &UpperConfig::default())?;
        let (lo, hi) = ((r / 4.0).min(0.5), 2.0 * r);
        let ok = est.lower <= hi && est.upper >= lo && est.upper <= 2.0 * r + 0.1;
        passed &= ok;
        values.push((format!("r={r}: lower"), Quantity::lower(est.lower, 1e-9)));
        values.push((format!("r={r}: upper"), Quantity::upper(est.upper, 1e-9)));
        note.push(format!("r={r} [{:.3}, {:.3}]", est.lower, est.upper));
    }
    Ok(Check { passed, values, note: note.join(", ") })
}

fn dyadic_gap() -> Result<Check> {
    let r_line = line()?;
    let mut passed = true;
    let mut values = vec![];
    let mut note = vec![];
    let target = 1.0 / 8.0 - 0.05;
    for r in [0.5f64, 1.0, 2.0] {
        let x = window(&rescale(&s(-6, 4)?, r)?, DSTAR_WINDOW)?;
        let lower = dstar_lower_tent(&x, &r_line)?;
        passed &= lower >= target;
        values.push((format!("r={r}: lower"), Quantity::lower(lower, 1e-9)));
        note.push(format!("r={r} {lower:.3}"));
    }
    Ok(Check {
        passed,
        values,
        note: format!("{} (need {target:.3})", note.join(", ")),
    })
}

fn pair_machinery() -> Result<Check> {
    let x = s(0, 10)?.space;
    let margin = is_besicovitch_pair(&x, 0, 1)?;
    let pair = PairCertificate { a: 0, b: 1, d: x.d(0, 1), margin };
    let props = verify_pair_properties(&x, &pair)?;
    let worst = props.checks.iter().filter_map(|c| c.max_error).fold(0.0, f64::max);
    let chain = doubling_chain(&x, &pair, 10)?;
    let reached = chain.last().map_or(pair.d, |p| p.d);
    let coords = product_coordinates(&x, &pair, 8)?;
    let passed = margin == 0.0 && props.all_hold && worst <= 1e-9 && reached == 512.0 && coords.defect == 0.0;
    Ok(Check {
        passed,
        values: vec![
            ("margin".into(), Quantity::exact(margin)),
            ("property_error".into(), Quantity::measured(worst, 1e-9)),
            ("chain_reach".into(), Quantity::exact(reached)),
            ("product_defect".into(), Quantity::exact(coords.defect)),
        ],
        note: format!(
            "margin {margin}, properties {}, chain to {reached}, defect {}",
            if props.all_hold { "hold" } else { "fail" },
            coords.defect
        ),
    })
}

fn classification() -> Result<Check> {
    let classify = |x: &FiniteMMS| classify_uniform(x, default_floor(x), default_tol(x));
    let g = classify(&make_r_grid(0.01, 50.0)?.space)?.verdict;
    let tt = classify(&t(256, 4)?.space)?.verdict;
    let ss = classify(&s(-10, 6)?.space)?.verdict;
    let t_ok = matches!(tt, Class::TLike { delta } if (delta - 1.0).abs() <= 0.05);
    Ok(Check {
        passed: g == Class::RLike && t_ok && ss == Class::SLike,
        values: vec![],
        note: format!("{g:?}, {tt:?}, {ss:?}"),
    })
}

fn five_balls() -> Result<Check> {
    let spaces = [
        make_r_grid(0.05, 5.0)?.space,
        t(64, 3)?.space,
        s(-4, 4)?.space,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut worst, mut exact, mut total) = (0, 0, 0);
    for (k, x) in spaces.iter().enumerate() {
        let count = if k == 0 { 66 } else { 67 };
        let radii = dyadic_radii(4.0 * x.min_positive_distance().unwrap_or(1.0), x.diameter() / 2.0);
        for _ in 0..count {
            let b = Ball::closed(rng.gen_range(0..x.n()), radii[rng.gen_range(0..radii.len())]);
            let rep = covering_number(x, &b, b.radius / 2.0)?;
            worst = worst.max(rep.upper);
            exact += rep.exact.is_some() as usize;
            total += 1;
        }
    }
    Ok(Check {
        passed: worst <= 5,
        values: vec![("max_cover_upper".into(), Quantity::upper(worst as f64, 0.0))],
        note: format!("{total} balls, at most {worst} needed ({exact} solved exactly)"),
    })
}

fn spider_cover() -> Result<Check> {
    let mut found = vec![];
    for n in 2..=8u32 {
        let sp = make_spider_midpoints(n)?;
        let mids: Vec<usize> = (1..=n as usize).collect();
        let only = restrict(&sp, &mids)?;
        let rep = covering_number(&only, &Ball::closed(0, 4.0), 1.0)?;
        found.push((n as usize, rep.exact));
    }
    Ok(Check {
        passed: found.iter().all(|(n, e)| *e == Some(*n)),
        values: found
            .iter()
            .map(|(n, e)| (format!("n={n}"), Quantity::exact(e.map_or(f64::NAN, |v| v as f64))))
            .collect(),
        note: "cover numbers 2..8 match".into(),
    })
}

fn star_stress() -> Result<Check> {
    let star = make_star_sn(3)?.space;
    let l2 = (1..=5)
        .map(|dim| lp_embed_stress(&star, 2.0, dim, 100, 0).map(|r| r.best_stress))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let l1 = lp_embed_stress(&star, 1.0, 4, 100, 0)?.best_stress;
    Ok(Check {
        passed: l2 >= 0.05 && l1 <= 1e-6,
        values: vec![
            ("l2_stress".into(), Quantity::upper(l2, 0.0)),
            ("l1_stress".into(), Quantity::upper(l1, 0.0)),
        ],
        note: format!("l2 {l2:.5} (need >= 0.05), l1 {l1:.1e}"),
    })
}

fn dilation_identity() -> Result<Check> {
    let rep = heisenberg_identity_check(1000, 0);
    Ok(Check {
        passed: rep.max_relative_error <= 1e-10,
        values: vec![("max_relative_error".into(), Quantity::exact(rep.max_relative_error))],
        note: format!("max relative error {:.2e}", rep.max_relative_error),
    })
}

fn tangent_scans() -> Result<Check> {
    let cfg = ScanConfig::default();
    let grid = tangent_scan(&make_r_grid(0.01, 50.0)?, 1.0, 2.0, 8, &cfg)?;
    let dy = tangent_scan(&s(-12, 4)?, 1.0, 2.0, 12, &cfg)?;
    let grid_ok = !grid.entries.is_empty() && grid.entries.iter().all(|e| e.verdict == Verdict::R);
    let dy_ok = !dy.entries.is_empty() && dy.entries.iter().all(|e| e.verdict == Verdict::S);
    Ok(Check {
        passed: grid_ok && dy_ok,
        values: vec![],
        note: format!(
            "grid {}/{} R, dyadic {}/{} S, dyadic R at {} scales",
            grid.entries.iter().filter(|e| e.verdict == Verdict::R).count(),
            grid.entries.len(),
            dy.entries.iter().filter(|e| e.verdict == Verdict::S).count(),
            dy.entries.len(),
            dy.entries.iter().filter(|e| e.verdict == Verdict::R).count(),
        ),
    })
}
