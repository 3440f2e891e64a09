//! Fourier transform on the curve.
//!
//! Forward: `f̃(ψ) = ∫_{C(-∞,∞)} f(θ) exp(-i J(θ) J(ψ)) d_F^α θ`.
//! Inverse: `f(θ) = (1/2π) ∫ f̃(ψ) exp(i J(θ) J(ψ)) dJ(ψ)`.
//!
//! Spectra are indexed by the spectral mass `v = J(ψ)`. The forward integral
//! is the midpoint F^α sum over `[-T, T]` with `T = tiles · S(1)`; the inverse
//! is the trapezoid rule over the uniform `v` grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fractal_calculus::{
    falpha_samples, point_at_parameter, total_mass, CurvePoint, StaircaseTable,
};
use crate::numeric::pairwise_sum;

/// Largest tolerated magnitude at the edge of a truncated integration range,
/// relative to the peak magnitude.
pub const DECAY_TOLERANCE: f64 = 1e-8;

/// Truncation and resolution of the forward F^α quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformQuadrature {
    /// The integral runs over `[-tiles · S(1), tiles · S(1)]`.
    pub tiles: u32,
    pub panels_per_tile: usize,
}

impl Default for TransformQuadrature {
    fn default() -> Self {
        Self {
            tiles: 8,
            panels_per_tile: 256,
        }
    }
}

/// Transform samples on a symmetric uniform grid of spectral masses.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub psi_masses: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SpectrumTable {
    pub fn new(psi_masses: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if psi_masses.len() != values.len() {
            return domain("spectrum grid and values differ in length");
        }
        check_grid(&psi_masses)?;
        Ok(Self { psi_masses, values })
    }

    /// Samples `spectrum(v)` on the grid.
    pub fn from_fn<G>(psi_masses: Vec<f64>, spectrum: G) -> Result<Self>
    where
        G: Fn(f64) -> Complex64,
    {
        let values = psi_masses.iter().map(|&v| spectrum(v)).collect();
        Self::new(psi_masses, values)
    }

    pub fn spacing(&self) -> f64 {
        self.psi_masses[1] - self.psi_masses[0]
    }

    /// Largest deviation from `value(-v) = conj(value(v))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[i] - self.values[n - 1 - i].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// A symmetric uniform grid `-V, .., V` with `n` points.
pub fn symmetric_grid(half_width: f64, n: usize) -> Result<Vec<f64>> {
    if n < 3 || n.is_multiple_of(2) {
        return domain(format!("symmetric grid needs an odd count >= 3, got {n}"));
    }
    if !(half_width > 0.0) {
        return domain(format!(
            "symmetric grid half width {half_width} must be > 0"
        ));
    }
    let step = 2.0 * half_width / (n - 1) as f64;
    let mid = (n / 2) as i64;
    Ok((0..n as i64).map(|i| (i - mid) as f64 * step).collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return domain("spectral grid needs at least 3 points");
    }
    let step = grid[1] - grid[0];
    if !(step > 0.0) {
        return domain("spectral grid must be increasing");
    }
    let n = grid.len();
    for i in 0..n {
        if (grid[i] + grid[n - 1 - i]).abs() > 1e-9 * step {
            return domain("spectral grid must be symmetric about 0");
        }
        if i > 0 && ((grid[i] - grid[i - 1]) - step).abs() > 1e-9 * step {
            return domain("spectral grid must be uniform");
        }
    }
    Ok(())
}

fn oscillatory_sum(masses: &[f64], weighted: &[f64], v: f64, sign: f64) -> Complex64 {
    let re: Vec<f64> = masses
        .iter()
        .zip(weighted)
        .map(|(s, w)| w * (s * v).cos())
        .collect();
    let im: Vec<f64> = masses
        .iter()
        .zip(weighted)
        .map(|(s, w)| sign * w * (s * v).sin())
        .collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

fn check_edge_decay(values: &[f64], context: &str) -> Result<()> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    if peak > 0.0 && edge > DECAY_TOLERANCE * peak {
        return Err(Error::Accuracy(format!(
            "{context}: edge magnitude {edge:.3e} exceeds {DECAY_TOLERANCE:e} x peak {peak:.3e}"
        )));
    }
    Ok(())
}

/// Forward transform of a curve function, evaluated at every spectral mass
/// of `psi_grid`, by F^α quadrature along the curve.
pub fn forward_transform<F>(
    f: F,
    table: &StaircaseTable,
    psi_grid: &[f64],
    quadrature: TransformQuadrature,
) -> Result<SpectrumTable>
where
    F: Fn(&CurvePoint) -> f64 + Sync,
{
    check_grid(psi_grid)?;
    if quadrature.tiles == 0 || quadrature.panels_per_tile == 0 {
        return domain("transform quadrature needs at least one tile and one panel");
    }
    let curve = table.curve();
    let reach = quadrature.tiles as f64 * total_mass(curve);
    let n_panels = 2 * quadrature.tiles as usize * quadrature.panels_per_tile;
    let samples = falpha_samples(&f, curve, -reach, reach, n_panels)?;
    check_edge_decay(&samples.values, "forward transform truncation")?;
    let masses: Vec<f64> = samples.midpoints.iter().map(|p| p.mass).collect();
    let weighted: Vec<f64> = samples
        .values
        .iter()
        .zip(&samples.weights)
        .map(|(f, w)| f * w)
        .collect();
    let values = psi_grid
        .par_iter()
        .map(|&v| oscillatory_sum(&masses, &weighted, v, -1.0))
        .collect();
    SpectrumTable::new(psi_grid.to_vec(), values)
}

/// Ordinary midpoint transform `∫ g(s) exp(-isv) ds` over `[-reach, reach]`
/// on the mass axis; the conjugate counterpart of [`forward_transform`].
pub fn transform_on_mass_axis<G>(
    g: G,
    reach: f64,
    n_panels: usize,
    psi_grid: &[f64],
) -> Result<SpectrumTable>
where
    G: Fn(f64) -> f64 + Sync,
{
    check_grid(psi_grid)?;
    if n_panels == 0 || !(reach > 0.0) {
        return domain("mass-axis transform needs reach > 0 and at least one panel");
    }
    let h = 2.0 * reach / n_panels as f64;
    let masses: Vec<f64> = (0..n_panels)
        .map(|i| -reach + h * (i as f64 + 0.5))
        .collect();
    let weighted: Vec<f64> = masses.iter().map(|&s| g(s) * h).collect();
    let values = psi_grid
        .par_iter()
        .map(|&v| oscillatory_sum(&masses, &weighted, v, -1.0))
        .collect();
    SpectrumTable::new(psi_grid.to_vec(), values)
}

/// Samples of an inverse transform at curve points.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    pub points: Vec<CurvePoint>,
    pub values: Vec<Complex64>,
}

/// Inverse transform at the (extended) curve parameters `u_grid`.
pub fn inverse_transform(
    spectrum: &SpectrumTable,
    table: &StaircaseTable,
    u_grid: &[f64],
) -> Result<CurveSamples> {
    let curve = table.curve();
    let mags: Vec<f64> = spectrum.values.iter().map(|z| z.norm()).collect();
    check_edge_decay(&mags, "inverse transform spectrum")?;
    let points = u_grid
        .iter()
        .map(|&u| point_at_parameter(curve, u))
        .collect::<Result<Vec<CurvePoint>>>()?;
    let dv = spectrum.spacing();
    let extent = points.iter().fold(0.0f64, |m, p| m.max(p.mass.abs()));
    if extent * dv >= PI {
        return Err(Error::Accuracy(format!(
            "spectral spacing {dv} cannot resolve masses up to {extent} (need |s| dv < pi)"
        )));
    }
    let n = spectrum.values.len();
    let trapezoid = |i: usize| if i == 0 || i == n - 1 { 0.5 * dv } else { dv };
    let re: Vec<f64> = (0..n)
        .map(|i| spectrum.values[i].re * trapezoid(i))
        .collect();
    let im: Vec<f64> = (0..n)
        .map(|i| spectrum.values[i].im * trapezoid(i))
        .collect();
    let values = points
        .par_iter()
        .map(|p| {
            // (a + ib) e^{isv} summed over v
            let cos_sin: Vec<(f64, f64)> = spectrum
                .psi_masses
                .iter()
                .map(|v| ((p.mass * v).cos(), (p.mass * v).sin()))
                .collect();
            let real: Vec<f64> = (0..n)
                .map(|i| re[i] * cos_sin[i].0 - im[i] * cos_sin[i].1)
                .collect();
            let imag: Vec<f64> = (0..n)
                .map(|i| re[i] * cos_sin[i].1 + im[i] * cos_sin[i].0)
                .collect();
            Complex64::new(pairwise_sum(&real), pairwise_sum(&imag)) / (2.0 * PI)
        })
        .collect();
    Ok(CurveSamples { points, values })
}
