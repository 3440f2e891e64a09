use std::f64::consts::PI;
use std::str::FromStr;

use clap::Args;
use koch_walk::fractal_calculus::{point_at_mass, total_mass, StaircaseTable};
use koch_walk::fractal_fourier::{
    forward_transform, inverse_transform, symmetric_grid, SpectrumTable, TransformQuadrature,
};
use koch_walk::koch_curve::build_curve;
use koch_walk::moments::{fit_exponent, moment_series, scaling_window};
use koch_walk::numeric::{geometric_grid, uniform_grid};
use koch_walk::stable_laws::{
    characteristic, fit_tail_exponent, leading_tail, StableInverter, StableLawConfig,
};
use num_complex::Complex64;

use crate::error::{invalid, CliResult};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub depth: u32,
    /// Midpoint panels per unit-curve tile.
    #[arg(long, default_value_t = 16_384)]
    pub panels: usize,
    /// Diffusivity A.
    #[arg(long, default_value_t = 1.0)]
    pub diffusivity: f64,
    /// First time of the geometric grid; defaults to the decade centred in
    /// the scaling window.
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 11)]
    pub t_points: usize,
}

/// The decade centred (on the log scale) in the scaling window.
pub fn central_decade(lo: f64, hi: f64) -> (f64, f64) {
    let centre = (lo * hi).sqrt();
    (centre / 10f64.sqrt(), centre * 10f64.sqrt())
}

/// `t,L1,L2` with a trailing `summary` of both fitted slopes and the largest
/// log-space residual.
pub fn moments(args: &MomentsArgs) -> CliResult<Table> {
    if !(args.diffusivity > 0.0) {
        return invalid(format!(
            "--diffusivity must be > 0, got {}",
            args.diffusivity
        ));
    }
    if args.t_points < 4 {
        return invalid("--t-points must be at least 4 for the exponent fit");
    }
    if args.panels == 0 {
        return invalid("--panels must be at least 1");
    }
    let curve = build_curve(args.depth)?;
    let (lo, hi) = scaling_window(&curve, args.diffusivity);
    let (d_lo, d_hi) = central_decade(lo, hi);
    let t_min = args.t_min.unwrap_or(d_lo);
    let t_max = args.t_max.unwrap_or(d_hi);
    if !(t_min > 0.0 && t_max > t_min) {
        return invalid(format!("need 0 < --t-min < --t-max, got {t_min}, {t_max}"));
    }
    let times = geometric_grid(t_min, t_max, args.t_points)?;
    let l1 = moment_series(&curve, 1, &times, args.diffusivity, args.panels)?;
    let l2 = moment_series(&curve, 2, &times, args.diffusivity, args.panels)?;
    let (f1, f2) = (fit_exponent(&l1)?, fit_exponent(&l2)?);
    let name = format!(
        "moments --depth {} --panels {} --diffusivity {} --t-min {} --t-max {} --t-points {}",
        args.depth, args.panels, args.diffusivity, t_min, t_max, args.t_points
    );
    let mut table = Table::new(name, &["t", "L1", "L2"]);
    for ((&t, &a), &b) in times.iter().zip(&l1.values).zip(&l2.values) {
        table.push(vec![t.into(), a.into(), b.into()]);
    }
    table.note(
        "summary",
        &["slope1".into(), "slope2".into(), "residuals".into()],
    );
    table.note(
        "summary",
        &[
            f1.slope.into(),
            f2.slope.into(),
            f1.residual.max(f2.residual).into(),
        ],
    );
    Ok(table)
}

#[derive(Debug, Clone, Args)]
pub struct LevyArgs {
    /// Stability index μ in (0, 2].
    #[arg(long, default_value_t = 1.5)]
    pub mu: f64,
    /// Step of the k grid; defaults to 1e-3.
    #[arg(long)]
    pub dk: Option<f64>,
    /// Truncation of the k grid; defaults to a value meeting the 1e-12 tail.
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Largest |y| of the density table.
    #[arg(long, default_value_t = 10.0)]
    pub y_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Emit the density read on the curve (`u,L,S,density`) and the fitted
    /// tail slope instead of the plain density.
    #[arg(long)]
    pub fractal: bool,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub depth: u32,
    /// Mass window `lo,hi` of the tail fit.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [16.0, 256.0])]
    pub window: Vec<f64>,
}

impl LevyArgs {
    fn stable_config(&self) -> CliResult<StableLawConfig> {
        let defaults = StableLawConfig::new(self.mu);
        let cfg = StableLawConfig {
            mu: self.mu,
            k_max: self.kmax.unwrap_or(defaults.k_max),
            dk: self.dk.unwrap_or(defaults.dk),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn levy(args: &LevyArgs) -> CliResult<Table> {
    let cfg = args.stable_config()?;
    let base = format!("levy --mu {} --dk {} --kmax {}", cfg.mu, cfg.dk, cfg.k_max);
    if args.fractal {
        let (lo, hi) = (args.window[0], args.window[1]);
        let curve = build_curve(args.depth)?;
        let fit = fit_tail_exponent(&curve, &cfg, (lo, hi))?;
        let name = format!("{base} --fractal --depth {} --window {lo},{hi}", args.depth);
        let mut table = Table::new(name, &["u", "L", "S", "density"]);
        for &(s, l, p) in &fit.samples {
            table.push(vec![
                point_at_mass(&curve, s).u.into(),
                l.into(),
                s.into(),
                p.into(),
            ]);
        }
        table.note("fitted_slope", &[fit.fitted_exponent.into()]);
        table.note(
            "predicted_slope",
            &[(-curve.alpha() * (cfg.mu + 1.0)).into()],
        );
        return Ok(table);
    }
    if !(args.y_max > 0.0) || args.points < 2 {
        return invalid("need --y-max > 0 and --points >= 2");
    }
    let inverter = StableInverter::new(&cfg)?;
    let ys = uniform_grid(-args.y_max, args.y_max, args.points);
    let density = inverter.density_grid(&ys);
    let name = format!("{base} --y-max {} --points {}", args.y_max, args.points);
    let mut table = Table::new(name, &["y", "density", "leading_tail"]);
    for (&y, p) in ys.iter().zip(density) {
        let tail = if y == 0.0 {
            f64::INFINITY
        } else {
            leading_tail(y.abs(), cfg.mu)?
        };
        table.push(vec![y.into(), p.into(), tail.into()]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Gaussian,
    Rect,
    Levy(f64),
}

impl FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" => Ok(TestFunction::Gaussian),
            "rect" => Ok(TestFunction::Rect),
            other => match other.strip_prefix("levy:").map(str::parse::<f64>) {
                Some(Ok(mu)) => Ok(TestFunction::Levy(mu)),
                _ => Err(format!(
                    "expected gaussian | rect | levy:<mu>, got '{other}'"
                )),
            },
        }
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Gaussian => f.write_str("gaussian"),
            TestFunction::Rect => f.write_str("rect"),
            TestFunction::Levy(mu) => write!(f, "levy:{mu}"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FourierArgs {
    /// gaussian: exp(-s²/2); rect: indicator of |s| <= half width;
    /// levy:<mu>: the stable law, whose spectrum is exp(-|v|^mu).
    #[arg(long, default_value = "gaussian")]
    pub function: TestFunction,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub depth: u32,
    /// Unit-curve tiles on each side of the origin.
    #[arg(long, default_value_t = 8)]
    pub tiles: u32,
    /// Panels per tile.
    #[arg(long, default_value_t = 256)]
    pub panels: usize,
    /// Largest |v| of the spectral grid; levy defaults to where the spectrum
    /// falls below 1e-9.
    #[arg(long)]
    pub v_max: Option<f64>,
    /// Spectral spacing.
    #[arg(long, default_value_t = 0.01)]
    pub dv: f64,
    /// Half width of `rect` in mass; defaults to S(1)/4.
    #[arg(long)]
    pub half_width: Option<f64>,
}

/// `v,re,im` on the spectral grid, with the largest deviation from the closed
/// form (forward transforms) or from direct inversion (levy) as a note.
pub fn fourier(args: &FourierArgs) -> CliResult<Table> {
    if !(args.dv > 0.0) {
        return invalid(format!("--dv must be > 0, got {}", args.dv));
    }
    let curve = build_curve(args.depth)?;
    let table_s = StaircaseTable::new(&curve, args.depth)?;
    let unit = total_mass(&curve);
    let v_max = match (args.v_max, args.function) {
        (Some(v), _) => v,
        (None, TestFunction::Levy(mu)) if mu > 0.0 => (-(1e-9f64).ln()).powf(1.0 / mu).ceil(),
        (None, _) => 8.0,
    };
    let half_steps = (v_max / args.dv).round() as usize;
    if half_steps == 0 {
        return invalid("--v-max must span at least one --dv");
    }
    let grid = symmetric_grid(half_steps as f64 * args.dv, 2 * half_steps + 1)?;
    let quad = TransformQuadrature {
        tiles: args.tiles,
        panels_per_tile: args.panels,
    };
    let mut config = format!(
        "fourier --function {} --depth {} --v-max {} --dv {}",
        args.function, args.depth, v_max, args.dv
    );
    let (spectrum, check_name, deviation) = match args.function {
        TestFunction::Gaussian => {
            let spec =
                forward_transform(|p| (-0.5 * p.mass * p.mass).exp(), &table_s, &grid, quad)?;
            let dev = max_deviation(&spec, |v| (2.0 * PI).sqrt() * (-0.5 * v * v).exp());
            (spec, "max_error_vs_closed_form", dev)
        }
        TestFunction::Rect => {
            let a = args.half_width.unwrap_or(unit / 4.0);
            if !(a > 0.0) {
                return invalid(format!("--half-width must be > 0, got {a}"));
            }
            config.push_str(&format!(" --half-width {a}"));
            let spec = forward_transform(
                |p| if p.mass.abs() <= a { 1.0 } else { 0.0 },
                &table_s,
                &grid,
                quad,
            )?;
            let dev = max_deviation(&spec, |v| {
                if v == 0.0 {
                    2.0 * a
                } else {
                    2.0 * (a * v).sin() / v
                }
            });
            (spec, "max_error_vs_closed_form", dev)
        }
        TestFunction::Levy(mu) => {
            let cfg = StableLawConfig::new(mu);
            cfg.validate()?;
            let spec =
                SpectrumTable::from_fn(grid, |v| Complex64::new(characteristic(v, &cfg), 0.0))?;
            // read the inverse back on the curve and compare with the
            // direct inversion of the stable law
            let inverter = StableInverter::new(&cfg)?;
            let back = inverse_transform(&spec, &table_s, &uniform_grid(-2.0, 2.0, 41))?;
            let dev = back
                .points
                .iter()
                .zip(&back.values)
                .map(|(p, z)| (z - inverter.density(p.mass)).norm())
                .fold(0.0, f64::max);
            (spec, "max_inverse_deviation_on_curve", dev)
        }
    };
    if !matches!(args.function, TestFunction::Levy(_)) {
        config.push_str(&format!(" --tiles {} --panels {}", args.tiles, args.panels));
    }
    let mut table = Table::new(config, &["v", "re", "im"]);
    for (&v, z) in spectrum.psi_masses.iter().zip(&spectrum.values) {
        table.push(vec![Cell::Real(v), Cell::Real(z.re), Cell::Real(z.im)]);
    }
    table.note(check_name, &[deviation.into()]);
    table.note("hermitian_defect", &[spectrum.hermitian_defect().into()]);
    Ok(table)
}

fn max_deviation(spec: &SpectrumTable, exact: impl Fn(f64) -> f64) -> f64 {
    spec.psi_masses
        .iter()
        .zip(&spec.values)
        .map(|(&v, z)| (z - Complex64::new(exact(v), 0.0)).norm())
        .fold(0.0, f64::max)
}
