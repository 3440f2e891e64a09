//! Absolute moments `<L^q>` of the Euclidean distance under the Gaussian-like
//! density in the mass coordinate, and log-log exponent fits.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{domain, Error, Result};
use crate::fractal_calculus::{falpha_integral_mass, total_mass};
use crate::koch_curve::FractalCurve;
use crate::numeric::{fit_line, geometric_grid};
use crate::walker::continuum_density;

/// Largest Gaussian tail mass tolerated beyond the truncation point.
pub const TRUNCATION_TAIL: f64 = 1e-10;

/// Scaling window in units of `S(1)`: `√(At)` between these two fractions.
pub const WINDOW_SPREAD: (f64, f64) = (1e-3, 1e-1);

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub residual: f64,
}

fn check_order(order: u32) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        domain(format!("moment order must be 1 or 2, got {order}"))
    }
}

/// Two-sided Gaussian tail mass beyond `±truncation` for variance `At`.
pub fn truncation_tail(t: f64, diffusivity: f64, truncation: f64) -> f64 {
    erfc(truncation / (2.0 * diffusivity * t).sqrt())
}

/// Smallest number of unit-curve masses `S(1)` that keeps the tail below
/// [`TRUNCATION_TAIL`].
pub fn required_tiles(curve: &FractalCurve, t: f64, diffusivity: f64) -> u32 {
    let unit = total_mass(curve);
    let mut tiles = 1;
    while truncation_tail(t, diffusivity, tiles as f64 * unit) > TRUNCATION_TAIL {
        tiles += 1;
    }
    tiles
}

/// `<L^q>(t) = 2 ∫_{C(0, T)} L(θ)^q P(t, J(θ)) d_F^α θ` with `T = tiles · S(1)`
/// and `n_panels` midpoint panels per tile.
pub fn absolute_moment(
    curve: &FractalCurve,
    order: u32,
    t: f64,
    diffusivity: f64,
    n_panels: usize,
    tiles: u32,
) -> Result<f64> {
    check_order(order)?;
    if !(t > 0.0 && diffusivity > 0.0) {
        return domain(format!(
            "moments need t > 0 and A > 0, got t = {t}, A = {diffusivity}"
        ));
    }
    if tiles == 0 || n_panels == 0 {
        return domain("moments need at least one tile and one panel");
    }
    let truncation = tiles as f64 * total_mass(curve);
    let tail = truncation_tail(t, diffusivity, truncation);
    if tail > TRUNCATION_TAIL {
        return Err(Error::Accuracy(format!(
            "Gaussian tail mass {tail:.3e} beyond {tiles} tile(s) exceeds {TRUNCATION_TAIL:e}; \
             use at least {} tiles",
            required_tiles(curve, t, diffusivity)
        )));
    }
    let norm = continuum_density(t, diffusivity, 0.0)?;
    let var2 = 2.0 * diffusivity * t;
    let half = falpha_integral_mass(
        |theta| {
            theta.distance().powi(order as i32) * norm * (-(theta.mass * theta.mass) / var2).exp()
        },
        curve,
        0.0,
        truncation,
        n_panels * tiles as usize,
    )?;
    Ok(2.0 * half)
}

/// Moments over a grid of times, one independent integral per time.
pub fn moment_series(
    curve: &FractalCurve,
    order: u32,
    times: &[f64],
    diffusivity: f64,
    n_panels: usize,
) -> Result<MomentSeries> {
    check_order(order)?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("moment series times must be strictly increasing");
    }
    let values = times
        .par_iter()
        .map(|&t| {
            let tiles = required_tiles(curve, t, diffusivity);
            absolute_moment(curve, order, t, diffusivity, n_panels, tiles)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MomentSeries {
        times: times.to_vec(),
        values,
        order,
    })
}

/// Heuristic exponent `q / (2α)` obtained by replacing `S` with `L^α`.
pub fn heuristic_exponent(alpha: f64, order: u32) -> Result<f64> {
    check_order(order)?;
    if !(alpha > 0.0) {
        return domain(format!("dimension must be positive, got {alpha}"));
    }
    Ok(order as f64 / (2.0 * alpha))
}

/// Least-squares line through `(log t, log value)`.
pub fn fit_exponent(series: &MomentSeries) -> Result<ExponentFit> {
    if series.times.len() != series.values.len() {
        return domain("moment series has mismatched lengths");
    }
    if series.times.len() < 4 {
        return domain(format!(
            "exponent fit needs at least 4 points, got {}",
            series.times.len()
        ));
    }
    if let Some(bad) = series
        .times
        .iter()
        .chain(&series.values)
        .find(|v| !(**v > 0.0))
    {
        return domain(format!("exponent fit needs positive data, found {bad}"));
    }
    let xs: Vec<f64> = series.times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = series.values.iter().map(|v| v.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    Ok(ExponentFit {
        slope: line.slope,
        intercept: line.intercept,
        residual: line.max_residual,
    })
}

/// Times for which `√(At)` spans [`WINDOW_SPREAD`] of the unit-curve mass.
pub fn scaling_window(curve: &FractalCurve, diffusivity: f64) -> (f64, f64) {
    let unit = total_mass(curve);
    let t = |fraction: f64| (fraction * unit).powi(2) / diffusivity;
    (t(WINDOW_SPREAD.0), t(WINDOW_SPREAD.1))
}

/// Geometric grid of `n` times over one decade starting at `t_lo`.
pub fn decade_grid(t_lo: f64, n: usize) -> Result<Vec<f64>> {
    geometric_grid(t_lo, 10.0 * t_lo, n)
}
