//! The full reproduction pipeline with a pass/fail table.

use clap::Args;
use koch_walk::fractal_calculus::{mass_function, total_mass, StaircaseTable};
use koch_walk::fractal_fourier::{
    forward_transform, inverse_transform, symmetric_grid, transform_on_mass_axis,
    TransformQuadrature,
};
use koch_walk::koch_curve::{build_curve, FractalCurve};
use koch_walk::moments::{fit_exponent, moment_series, scaling_window};
use koch_walk::numeric::{geometric_grid, uniform_grid};
use koch_walk::passage::{aligned_delta, first_passage_pmf_exact, first_passage_sim, lmax_profile};
use koch_walk::stable_laws::{
    cauchy_density, fit_tail_exponent, gaussian_mu2_density, StableInverter, StableLawConfig,
};
use koch_walk::walker::{simulate_walks, WalkConfig};

use crate::analysis::central_decade;
use crate::error::CliResult;
use crate::table::{Cell, Table};
use crate::walks::DEFAULT_SEED;

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(6..=12))]
    pub depth: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

struct Check {
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
}

impl Check {
    fn new(name: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name,
            value,
            lo,
            hi,
        }
    }

    fn passed(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

/// Rows `check,value,lower,upper,status`; the caller turns failures into a
/// non-zero exit.
pub fn repro(args: &ReproArgs) -> CliResult<(Table, usize)> {
    let curve = build_curve(args.depth)?;
    let mut checks = Vec::new();

    // moment exponents
    let (lo, hi) = scaling_window(&curve, 1.0);
    let (d_lo, d_hi) = central_decade(lo, hi);
    let times = geometric_grid(d_lo, d_hi, 11)?;
    let s1 = fit_exponent(&moment_series(&curve, 1, &times, 1.0, 16_384)?)?;
    let s2 = fit_exponent(&moment_series(&curve, 2, &times, 1.0, 16_384)?)?;
    checks.push(Check::new("moment_slope_L1", s1.slope, 0.37, 0.43));
    checks.push(Check::new("moment_slope_L2", s2.slope, 0.77, 0.83));

    // walks
    let config = WalkConfig::new(aligned_delta(&curve), 16, args.seed);
    let tv = simulate_walks(&curve, &config, 100_000)?.total_variation_to_exact()?;
    checks.push(Check::new("walk_tv_n16", tv, 0.0, 0.02));

    // mass identities
    let target = koch_walk::fractal_calculus::gamma_norm(curve.alpha());
    let mut worst = 0.0f64;
    for depth in 1..=6 {
        let c = build_curve(depth)?;
        let whole = mass_function(&c, 0.0, 1.0, depth)?;
        let quarter = mass_function(&c, 0.0, 0.25, depth)?;
        worst = worst
            .max((whole - target).abs())
            .max((quarter - whole / 4.0).abs());
    }
    checks.push(Check::new("mass_identity_deviation", worst, 0.0, 1e-12));

    // stable laws
    let ys = uniform_grid(-10.0, 10.0, 2001);
    let max_err = |cfg: StableLawConfig, exact: fn(f64) -> f64| -> CliResult<f64> {
        let inv = StableInverter::new(&cfg)?;
        Ok(ys
            .iter()
            .zip(inv.density_grid(&ys))
            .map(|(&y, p)| (p - exact(y)).abs())
            .fold(0.0, f64::max))
    };
    let cfg = |mu| StableLawConfig {
        mu,
        k_max: 50.0,
        dk: 1e-3,
    };
    checks.push(Check::new(
        "cauchy_inversion_error",
        max_err(cfg(1.0), cauchy_density)?,
        0.0,
        1e-4,
    ));
    checks.push(Check::new(
        "gauss_inversion_error",
        max_err(cfg(2.0), gaussian_mu2_density)?,
        0.0,
        1e-6,
    ));

    let law = StableLawConfig::new(1.5);
    let koch_slope = fit_tail_exponent(&curve, &law, (16.0, 256.0))?.fitted_exponent;
    let line = FractalCurve::straight_line(args.depth)?;
    let line_slope = fit_tail_exponent(&line, &law, (16.0, 256.0))?.fitted_exponent;
    let koch_target = -curve.alpha() * 2.5;
    checks.push(Check::new(
        "tail_slope_koch",
        koch_slope,
        1.05 * koch_target,
        0.95 * koch_target,
    ));
    checks.push(Check::new(
        "tail_slope_line",
        line_slope,
        1.05 * -2.5,
        0.95 * -2.5,
    ));

    // first passage and the envelope
    let fpt_config = WalkConfig::new(aligned_delta(&curve), 0, args.seed);
    let mut worst_tv = 0.0f64;
    for k in [-4i64, -3, -2, -1, 1, 2, 3, 4] {
        let sample = first_passage_sim(&curve, &fpt_config, k, 100_000, 64)?;
        let exact = first_passage_pmf_exact(k, 64)?;
        let mut tv: f64 = sample
            .pmf()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .sum();
        tv += (sample.censored_fraction() - (1.0 - exact.iter().sum::<f64>())).abs();
        worst_tv = worst_tv.max(0.5 * tv);
    }
    checks.push(Check::new("first_passage_tv", worst_tv, 0.0, 0.02));
    let small = build_curve(3)?;
    let profile = lmax_profile(
        &StaircaseTable::new(&small, 3)?,
        1.0,
        aligned_delta(&small),
        64,
    )?;
    let plateau = profile.longest_plateau() as f64;
    checks.push(Check::new(
        "lmax_longest_plateau",
        plateau,
        2.0,
        f64::INFINITY,
    ));

    // Fourier
    let table = StaircaseTable::new(&curve, args.depth)?;
    let q = TransformQuadrature::default();
    let grid = symmetric_grid(8.0, 1601)?;
    let gaussian = |s: f64| (-0.5 * s * s).exp();
    let spec = forward_transform(|p| gaussian(p.mass), &table, &grid, q)?;
    let reach = q.tiles as f64 * total_mass(&curve);
    let mass_side = transform_on_mass_axis(
        gaussian,
        reach,
        2 * q.tiles as usize * q.panels_per_tile,
        &grid,
    )?;
    let commute = spec
        .values
        .iter()
        .zip(&mass_side.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let back = inverse_transform(&spec, &table, &uniform_grid(-6.0, 6.0, 121))?;
    let round = back
        .points
        .iter()
        .zip(&back.values)
        .map(|(p, z)| (z - gaussian(p.mass)).norm())
        .fold(0.0, f64::max);
    checks.push(Check::new("fourier_round_trip_error", round, 0.0, 1e-5));
    checks.push(Check::new("fourier_commutation_error", commute, 0.0, 1e-10));

    let name = format!("repro --depth {} --seed {}", args.depth, args.seed);
    let mut out = Table::new(name, &["check", "value", "lower", "upper", "status"]);
    let mut failed = 0;
    for c in &checks {
        if !c.passed() {
            failed += 1;
        }
        out.push(vec![
            c.name.into(),
            c.value.into(),
            c.lo.into(),
            c.hi.into(),
            Cell::from(if c.passed() { "PASS" } else { "FAIL" }),
        ]);
    }
    Ok((out, failed))
}
