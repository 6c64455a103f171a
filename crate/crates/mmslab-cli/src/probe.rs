use std::path::PathBuf;

use clap::{Args, Subcommand};
use mmslab::geoprobe::{
    ball_masses, covering_number, doubling_constant, dyadic_radii, hausdorff_upper, heisenberg_growth_constant,
    heisenberg_identity_check, lip_projection_lower, lp_embed_stress, separation_profile, stride_sample,
    uniformity_defect_at,
};
use mmslab::mms_core::{Ball, FiniteMMS, TIE_TOL};
use mmslab::model_spaces::{make_s, make_star_sn, STruncationSpec};
use mmslab::report::{Quantities, Quantity};
use serde::Serialize;

use crate::failure::Failure;
use crate::commands::guard;
use crate::input;
use crate::output::{emit, emit_csv};
use crate::Global;

#[derive(Subcommand)]
pub enum ProbeCommand {
    /// Largest deviation of closed-ball masses from the radius.
    Uniformity(UniformityArgs),
    /// Half-radius cover number of one ball.
    Cover(CoverArgs),
    /// Doubling constant over sampled balls.
    Doubling(DoublingArgs),
    /// Hausdorff content upper bound, with a projection lower bound on dyadic spaces.
    Hausdorff(HausdorffArgs),
    /// Single-linkage cluster statistics across dyadic scales.
    Separation(SeparationArgs),
    /// Best embedding stress into an `ℓ_p` space.
    Stress(StressArgs),
    /// Dilation identity and growth constant on the Heisenberg group.
    Heisenberg(HeisenbergArgs),
}

pub fn run(g: &Global, p: &ProbeCommand) -> anyhow::Result<()> {
    match p {
        ProbeCommand::Uniformity(a) => uniformity(g, a),
        ProbeCommand::Cover(a) => cover(g, a),
        ProbeCommand::Doubling(a) => doubling(g, a),
        ProbeCommand::Hausdorff(a) => hausdorff(g, a),
        ProbeCommand::Separation(a) => separation(g, a),
        ProbeCommand::Stress(a) => stress(g, a),
        ProbeCommand::Heisenberg(a) => heisenberg(g, a),
    }
}

fn radii_of(x: &FiniteMMS, lo: Option<f64>, hi: Option<f64>) -> anyhow::Result<Vec<f64>> {
    let lo = lo.unwrap_or_else(|| 4.0 * x.min_positive_distance().unwrap_or(1.0));
    let hi = hi.unwrap_or_else(|| x.diameter() / 2.0);
    if !(lo > 0.0 && hi >= lo) {
        return Err(Failure::parse(format!("need 0 < r-min <= r-max, got {lo} and {hi}")).into());
    }
    Ok(dyadic_radii(lo, hi))
}

#[derive(Args, Debug, Serialize)]
pub struct UniformityArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Smallest dyadic radius; four times the smallest distance by default.
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Largest dyadic radius; half the diameter by default.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Centres spread evenly over the points; every point by default.
    #[arg(long)]
    pub centers: Option<usize>,
}

#[derive(Serialize)]
struct UniformityView {
    max_defect: Quantity,
    worst_center: usize,
    worst_radius: Quantity,
    worst_measure: Quantity,
    centers: usize,
    radii: usize,
}

#[derive(Serialize)]
struct RadiusRow {
    radius: f64,
    min_measure: f64,
    max_measure: f64,
    max_defect: f64,
}

fn uniformity(g: &Global, a: &UniformityArgs) -> anyhow::Result<()> {
    let (x, _) = input::space(&a.input, g.max_points)?;
    let radii = radii_of(&x, a.r_min, a.r_max)?;
    let centers = stride_sample(x.n(), a.centers.unwrap_or(x.n()));
    let rep = uniformity_defect_at(&x, &centers, &radii)?;
    let masses: Vec<Vec<f64>> = centers.iter().map(|&c| ball_masses(&x, c, &radii)).collect();
    let rows = radii.iter().enumerate().map(|(k, &r)| {
        let col = masses.iter().map(|m| m[k]);
        RadiusRow {
            radius: r,
            min_measure: col.clone().fold(f64::INFINITY, f64::min),
            max_measure: col.clone().fold(f64::NEG_INFINITY, f64::max),
            max_defect: col.map(|m| (m - r).abs()).fold(0.0, f64::max),
        }
    });
    emit_csv(g, rows)?;
    emit(
        g,
        "probe uniformity",
        &[&a.input],
        a,
        UniformityView {
            max_defect: Quantity::measured(rep.max_defect, TIE_TOL),
            worst_center: rep.worst_center,
            worst_radius: Quantity::exact(rep.worst_radius),
            worst_measure: Quantity::measured(rep.worst_measure, TIE_TOL),
            centers: rep.centers,
            radii: rep.radii,
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct CoverArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    #[arg(long)]
    pub radius: f64,
    /// Radius of the covering balls; half the radius by default.
    #[arg(long)]
    pub r_small: Option<f64>,
    /// Cover the open ball instead of the closed one.
    #[arg(long)]
    pub open: bool,
}

#[derive(Serialize)]
struct CoverView {
    exact: Option<Quantity>,
    upper: Quantity,
    lower: Quantity,
    centers: Vec<usize>,
    candidates: usize,
}

#[derive(Serialize)]
struct CenterRow {
    center: usize,
}

fn cover(g: &Global, a: &CoverArgs) -> anyhow::Result<()> {
    let (x, _) = input::space(&a.input, g.max_points)?;
    let b = if a.open {
        Ball::open(a.center, a.radius)
    } else {
        Ball::closed(a.center, a.radius)
    };
    let rep = covering_number(&x, &b, a.r_small.unwrap_or(a.radius / 2.0))?;
    emit_csv(g, rep.centers.iter().map(|&center| CenterRow { center }))?;
    emit(
        g,
        "probe cover",
        &[&a.input],
        a,
        CoverView {
            exact: rep.exact.map(|e| Quantity::exact(e as f64)),
            upper: Quantity::upper(rep.upper as f64, 0.0),
            lower: Quantity::lower(rep.lower as f64, 0.0),
            centers: rep.centers,
            candidates: rep.candidates,
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct DoublingArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Ball centres spread evenly over the points.
    #[arg(long, default_value_t = 16)]
    pub centers: usize,
}

#[derive(Serialize)]
struct DoublingView {
    upper: Quantity,
    lower: Quantity,
    witness_center: Option<usize>,
    witness_radius: Option<Quantity>,
    balls: usize,
}

#[derive(Serialize)]
struct BallRow {
    center: usize,
    radius: f64,
    upper: usize,
    lower: usize,
}

fn doubling(g: &Global, a: &DoublingArgs) -> anyhow::Result<()> {
    let (x, _) = input::space(&a.input, g.max_points)?;
    let radii = radii_of(&x, a.r_min, a.r_max)?;
    let balls: Vec<Ball> = stride_sample(x.n(), a.centers)
        .into_iter()
        .flat_map(|c| radii.iter().map(move |&r| Ball::closed(c, r)))
        .collect();
    let rep = doubling_constant(&x, &balls)?;
    let rows = balls
        .iter()
        .map(|b| {
            covering_number(&x, b, b.radius / 2.0).map(|c| BallRow {
                center: b.center,
                radius: b.radius,
                upper: c.upper,
                lower: c.lower,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if g.csv.is_some() {
        emit_csv(g, rows)?;
    }
    emit(
        g,
        "probe doubling",
        &[&a.input],
        a,
        DoublingView {
            upper: Quantity::upper(rep.upper as f64, 0.0),
            lower: Quantity::lower(rep.lower as f64, 0.0),
            witness_center: rep.witness.map(|b| b.center),
            witness_radius: rep.witness.map(|b| Quantity::exact(b.radius)),
            balls: balls.len(),
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct HausdorffArgs {
    #[arg(long, conflicts_with_all = ["m", "n"], required_unless_present_all = ["m", "n"])]
    pub input: Option<PathBuf>,
    /// Build the dyadic space S(m, n) in place; a space read from a file has no dyadic structure.
    #[arg(long, allow_negative_numbers = true, requires = "n")]
    pub m: Option<i32>,
    #[arg(long, allow_negative_numbers = true, requires = "m")]
    pub n: Option<i32>,
    /// Largest piece diameter.
    #[arg(long)]
    pub delta: f64,
    /// Also bound the content from below by Lipschitz projection (dyadic spaces only).
    #[arg(long)]
    pub projection: bool,
}

#[derive(Serialize)]
struct HausdorffView {
    delta: Quantity,
    content_upper: Quantity,
    projection_lower: Option<Quantity>,
}

#[derive(Serialize)]
struct HausdorffRow {
    delta: f64,
    content_upper: f64,
}

fn hausdorff(g: &Global, a: &HausdorffArgs) -> anyhow::Result<()> {
    let (x, inputs) = match (&a.input, a.m.zip(a.n)) {
        (Some(path), _) => (input::space(path, g.max_points)?.0, vec![path.as_path()]),
        (None, Some((m, n))) => {
            let spec = STruncationSpec::new(m, n)?;
            guard(1usize.checked_shl(spec.bits()).unwrap_or(usize::MAX), g)?;
            (make_s(spec)?.space, vec![])
        }
        (None, None) => return Err(Failure::parse("one of --input or --m/--n is required").into()),
    };
    let upper = hausdorff_upper(&x, a.delta)?;
    let lower = if a.projection {
        Some(lip_projection_lower(&x, None)?)
    } else {
        None
    };
    emit_csv(g, [HausdorffRow { delta: a.delta, content_upper: upper }])?;
    emit(
        g,
        "probe hausdorff",
        &inputs,
        a,
        HausdorffView {
            delta: Quantity::exact(a.delta),
            content_upper: Quantity::upper(upper, TIE_TOL),
            projection_lower: lower.map(|l| Quantity::lower(l, TIE_TOL)),
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct SeparationArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub scale_min: Option<f64>,
    #[arg(long)]
    pub scale_max: Option<f64>,
}

#[derive(Serialize)]
struct SeparationRow {
    scale: Quantity,
    cluster_count: usize,
    max_cluster_diameter: Quantity,
    min_cluster_separation: Option<Quantity>,
}

#[derive(Serialize)]
struct SeparationView {
    entries: Vec<SeparationRow>,
    longest_clean_run: usize,
    unrectifiable_evidence: bool,
}

#[derive(Serialize)]
struct SeparationCsv {
    scale: f64,
    cluster_count: usize,
    max_cluster_diameter: f64,
    min_cluster_separation: Option<f64>,
}

fn separation(g: &Global, a: &SeparationArgs) -> anyhow::Result<()> {
    let (x, _) = input::space(&a.input, g.max_points)?;
    let lo = a.scale_min.or(x.min_positive_distance()).unwrap_or(1.0);
    let mut scales = radii_of(&x, Some(lo), a.scale_max.or(Some(x.diameter().max(lo))))?;
    scales.reverse();
    let prof = separation_profile(&x, &scales)?;
    emit_csv(
        g,
        prof.entries.iter().map(|e| SeparationCsv {
            scale: e.scale,
            cluster_count: e.cluster_count,
            max_cluster_diameter: e.max_cluster_diameter,
            min_cluster_separation: e.min_cluster_separation,
        }),
    )?;
    emit(
        g,
        "probe separation",
        &[&a.input],
        a,
        SeparationView {
            entries: prof
                .entries
                .iter()
                .map(|e| SeparationRow {
                    scale: Quantity::exact(e.scale),
                    cluster_count: e.cluster_count,
                    max_cluster_diameter: Quantity::measured(e.max_cluster_diameter, TIE_TOL),
                    min_cluster_separation: e.min_cluster_separation.map(|s| Quantity::measured(s, TIE_TOL)),
                })
                .collect(),
            longest_clean_run: prof.longest_clean_run,
            unrectifiable_evidence: prof.unrectifiable_evidence,
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct StressArgs {
    /// Space to embed; use --star instead for the star space.
    #[arg(long, conflicts_with = "star")]
    pub input: Option<PathBuf>,
    /// Arm count of the star space.
    #[arg(long)]
    pub star: Option<u32>,
    /// Exponent of the target norm: 1, 2, or inf.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
}

#[derive(Serialize)]
struct StressView {
    p: Quantity,
    dim: usize,
    best_stress: Quantity,
    restarts: usize,
    config: Vec<Quantities>,
}

fn stress(g: &Global, a: &StressArgs) -> anyhow::Result<()> {
    let (x, inputs) = match (&a.input, a.star) {
        (Some(path), _) => (input::space(path, g.max_points)?.0, vec![path.as_path()]),
        (None, Some(n)) => (make_star_sn(n)?.space, vec![]),
        (None, None) => return Err(Failure::parse("one of --input or --star is required").into()),
    };
    let res = lp_embed_stress(&x, a.p, a.dim, a.restarts, g.seed)?;
    emit_csv(g, res.config.iter().cloned())?;
    emit(
        g,
        "probe stress",
        &inputs,
        a,
        StressView {
            p: Quantity::exact(a.p),
            dim: res.dim,
            // Any configuration's stress bounds the optimum from above.
            best_stress: Quantity::upper(res.best_stress, 0.0),
            restarts: res.restarts,
            config: res.config.into_iter().map(|c| Quantities::measured(c, 0.0)).collect(),
        },
    )
}

#[derive(Args, Debug, Serialize)]
pub struct HeisenbergArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Samples for the growth constant; skipped when zero.
    #[arg(long, default_value_t = 1000)]
    pub growth_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub m_min: i32,
    #[arg(long, default_value_t = 8)]
    pub m_max: i32,
}

#[derive(Serialize)]
struct HeisenbergView {
    samples: usize,
    max_relative_error: Quantity,
    worst_exponents: (i32, i32),
    growth_constant: Option<Quantity>,
    growth_samples: usize,
    exponent_range: (i32, i32),
}

#[derive(Serialize)]
struct HeisenbergRow {
    quantity: &'static str,
    value: f64,
}

fn heisenberg(g: &Global, a: &HeisenbergArgs) -> anyhow::Result<()> {
    let id = heisenberg_identity_check(a.samples, g.seed);
    let growth = if a.growth_samples > 0 {
        Some(heisenberg_growth_constant(a.growth_samples, (a.m_min, a.m_max), g.seed)?)
    } else {
        None
    };
    let mut rows = vec![HeisenbergRow { quantity: "max_relative_error", value: id.max_relative_error }];
    if let Some(gr) = &growth {
        rows.push(HeisenbergRow { quantity: "growth_constant", value: gr.constant });
    }
    emit_csv(g, rows)?;
    emit(
        g,
        "probe heisenberg",
        &[],
        a,
        HeisenbergView {
            samples: id.samples,
            max_relative_error: Quantity::measured(id.max_relative_error, 0.0),
            worst_exponents: id.worst_exponents,
            // A maximum over samples bounds the supremum from below.
            growth_constant: growth.as_ref().map(|gr| Quantity::lower(gr.constant, 0.0)),
            growth_samples: a.growth_samples,
            exponent_range: (a.m_min, a.m_max),
        },
    )
}
