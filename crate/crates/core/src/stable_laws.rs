//! Symmetric stable laws (β = 0) read in the mass coordinate of a curve.
//!
//! The density `(1/2π) ∫ exp(iky - |k|^μ) dk` is evaluated as the real cosine
//! integral `(1/π) ∫_0^{k_max} cos(ky) exp(-k^μ) dk` with the trapezoid rule
//! on a uniform k-grid. Truncation error is bounded by `exp(-k_max^μ)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};
use crate::fractal_calculus::{point_at_mass, total_mass, StaircaseTable};
use crate::koch_curve::FractalCurve;
use crate::numeric::{fit_line, geometric_grid, pairwise_sum};

/// Largest tolerated truncation term `exp(-k_max^μ)`.
pub const TRUNCATION_TOLERANCE: f64 = 1e-12;

/// Below this index the inversion is reported as unreliable.
pub const LOW_ACCURACY_MU: f64 = 0.5;

/// Largest allowed number of k-grid steps.
pub const MAX_GRID_STEPS: f64 = 1e8;

/// Relative agreement between the leading tail term and the inverted density
/// required inside a tail-fit window.
pub const ASYMPTOTIC_AGREEMENT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLawConfig {
    pub mu: f64,
    pub k_max: f64,
    pub dk: f64,
}

impl StableLawConfig {
    /// Defaults: `dk = 1e-3`; `k_max = 50` for μ ≥ 1 and `200` below, raised
    /// when needed so that `exp(-k_max^μ) < 1e-12`.
    pub fn new(mu: f64) -> Self {
        let base = if mu >= 1.0 { 50.0 } else { 200.0 };
        let needed = if mu > 0.0 {
            (1.05 * (-TRUNCATION_TOLERANCE.ln()).powf(1.0 / mu)).ceil()
        } else {
            base
        };
        Self {
            mu,
            k_max: f64::max(base, needed),
            dk: 1e-3,
        }
    }

    /// Asymmetry parameter; only the symmetric law is supported.
    pub fn beta(&self) -> f64 {
        0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 2.0) {
            return domain(format!("stability index mu = {} outside (0, 2]", self.mu));
        }
        if !(self.dk > 0.0 && self.dk.is_finite()) {
            return domain(format!("k-grid step dk = {} must be > 0", self.dk));
        }
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return domain(format!("k_max = {} must be > 0", self.k_max));
        }
        if self.k_max / self.dk > MAX_GRID_STEPS {
            return Err(Error::Capacity(format!(
                "k-grid has {:.3e} steps, more than {MAX_GRID_STEPS:e}",
                self.k_max / self.dk
            )));
        }
        Ok(())
    }
}

/// `exp(-|k|^μ)`.
pub fn characteristic(k: f64, config: &StableLawConfig) -> f64 {
    (-k.abs().powf(config.mu)).exp()
}

/// Precomputed k-grid and trapezoid weights for repeated inversions.
#[derive(Debug, Clone)]
pub struct StableInverter {
    config: StableLawConfig,
    ks: Vec<f64>,
    weights: Vec<f64>,
}

impl StableInverter {
    pub fn new(config: &StableLawConfig) -> Result<Self> {
        config.validate()?;
        if config.mu < LOW_ACCURACY_MU {
            return Err(Error::Accuracy(format!(
                "mu = {} < {LOW_ACCURACY_MU}: heavy integrand tails make the inversion low-accuracy",
                config.mu
            )));
        }
        let truncation = characteristic(config.k_max, config);
        if truncation >= TRUNCATION_TOLERANCE {
            return Err(Error::Accuracy(format!(
                "truncation term exp(-k_max^mu) = {truncation:.3e} >= {TRUNCATION_TOLERANCE:e}; \
                 raise k_max above {:.1}",
                (-TRUNCATION_TOLERANCE.ln()).powf(1.0 / config.mu)
            )));
        }
        let steps = (config.k_max / config.dk).round() as usize;
        let ks: Vec<f64> = (0..=steps).map(|m| m as f64 * config.dk).collect();
        let weights = ks
            .iter()
            .enumerate()
            .map(|(m, &k)| {
                let end = if m == 0 || m == steps { 0.5 } else { 1.0 };
                end * config.dk * characteristic(k, config) / PI
            })
            .collect();
        Ok(Self {
            config: *config,
            ks,
            weights,
        })
    }

    pub fn config(&self) -> &StableLawConfig {
        &self.config
    }

    pub fn density(&self, y: f64) -> f64 {
        let terms: Vec<f64> = self
            .ks
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| w * (k * y).cos())
            .collect();
        pairwise_sum(&terms)
    }

    pub fn density_grid(&self, ys: &[f64]) -> Vec<f64> {
        ys.par_iter().map(|&y| self.density(y)).collect()
    }
}

/// Stable density at mass coordinate `y`.
pub fn invert_stable(y: f64, config: &StableLawConfig) -> Result<f64> {
    Ok(StableInverter::new(config)?.density(y))
}

/// `1 / (π (1 + y²))`, the μ = 1 law.
pub fn cauchy_density(y: f64) -> f64 {
    1.0 / (PI * (1.0 + y * y))
}

/// `(1 / (2√π)) exp(-y²/4)`, the Fourier inverse of `exp(-k²)`.
pub fn gaussian_mu2_density(y: f64) -> f64 {
    (-y * y / 4.0).exp() / (2.0 * PI.sqrt())
}

fn check_tail_argument(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        domain(format!("tail expansion needs y > 0, got {y}"))
    }
}

/// Partial sum of the large-argument expansion
/// `π⁻¹ Σ_{m=1}^{m_max} (-1)^{m+1} y^{-(μm+1)} Γ(1+mμ) sin(πμm/2) / m!`.
pub fn tail_series(y: f64, mu: f64, m_max: u32) -> Result<f64> {
    check_tail_argument(y)?;
    if !(mu > 0.0 && mu < 2.0) || mu == 1.0 {
        return domain(format!(
            "tail series needs mu in (0, 2) other than 1, got {mu}"
        ));
    }
    if m_max == 0 {
        return domain("tail series needs m_max >= 1");
    }
    let terms: Vec<f64> = (1..=m_max)
        .map(|m| {
            let m_f = m as f64;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let magnitude =
                (ln_gamma(1.0 + m_f * mu) - ln_gamma(1.0 + m_f) - (mu * m_f + 1.0) * y.ln()).exp();
            sign * magnitude * (PI * mu * m_f / 2.0).sin()
        })
        .collect();
    Ok(pairwise_sum(&terms) / PI)
}

/// Leading tail term `π⁻¹ y^{-(μ+1)} Γ(1+μ) sin(πμ/2)`.
pub fn leading_tail(y: f64, mu: f64) -> Result<f64> {
    check_tail_argument(y)?;
    if !(mu > 0.0 && mu <= 2.0) {
        return domain(format!("stability index mu = {mu} outside (0, 2]"));
    }
    Ok(y.powf(-(mu + 1.0)) * gamma(1.0 + mu) * (PI * mu / 2.0).sin() / PI)
}

/// The stable density read on the curve, `u -> invert_stable(S(u))`.
pub struct FractalizedDensity<'t> {
    table: &'t StaircaseTable,
    inverter: StableInverter,
}

/// Fractalize the stable law of `config` onto the curve of `table`.
pub fn fractalized_density<'t>(
    table: &'t StaircaseTable,
    config: &StableLawConfig,
) -> Result<FractalizedDensity<'t>> {
    Ok(FractalizedDensity {
        table,
        inverter: StableInverter::new(config)?,
    })
}

impl FractalizedDensity<'_> {
    /// Density at the (extended) curve parameter `u`.
    pub fn at_parameter(&self, u: f64) -> Result<f64> {
        let theta = crate::fractal_calculus::point_at_parameter(self.table.curve(), u)?;
        self.at_mass(theta.mass)
    }

    /// Density at the curve point with mass coordinate `s`.
    pub fn at_mass(&self, s: f64) -> Result<f64> {
        if !self.table.covers(s) {
            let (lo, hi) = self.table.mass_range();
            return domain(format!("mass {s} outside the table range [{lo}, {hi}]"));
        }
        Ok(self.inverter.density(s))
    }

    pub fn inverter(&self) -> &StableInverter {
        &self.inverter
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    /// Slope of log density against log Euclidean distance.
    pub fitted_exponent: f64,
    /// Fit range in the mass coordinate.
    pub window: (f64, f64),
    /// `(mass, L, density)` of every fitted point.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Number of target masses placed geometrically across a tail-fit window.
const TAIL_FIT_TARGETS: usize = 400;

/// Aligned masses of the infinite curve close to a geometric sequence across
/// `[lo, hi]`. A mass in `(4^{n-1} S(1), 4^n S(1)]` is aligned when it is a
/// vertex of the blown-up construction, i.e. a multiple of `4^n S(1) / 4^depth`.
pub fn aligned_masses(curve: &FractalCurve, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let unit = total_mass(curve);
    let cells = curve.segment_count() as f64;
    let mut out: Vec<f64> = geometric_grid(lo, hi, n)?
        .into_iter()
        .map(|target| {
            let mut reach = unit;
            while target > reach {
                reach *= 4.0;
            }
            let cell = reach / cells;
            (target / cell).round() * cell
        })
        .filter(|&s| s >= lo && s <= hi)
        .collect();
    out.dedup();
    Ok(out)
}

/// Least-squares slope of `log p(S)` against `log L` over aligned curve
/// points whose mass lies in `window`.
pub fn fit_tail_exponent(
    curve: &FractalCurve,
    config: &StableLawConfig,
    window: (f64, f64),
) -> Result<TailFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return domain(format!("tail window [{lo}, {hi}] must satisfy 0 < lo < hi"));
    }
    let inverter = StableInverter::new(config)?;
    for y in geometric_grid(lo, hi, 16)? {
        let exact = inverter.density(y);
        let lead = leading_tail(y, config.mu)?;
        let deviation = (lead - exact).abs() / exact.abs();
        if !(deviation <= ASYMPTOTIC_AGREEMENT) {
            return Err(Error::Accuracy(format!(
                "tail window [{lo}, {hi}] is not asymptotic: leading term deviates by {:.1}% at y = {y:.4}",
                100.0 * deviation
            )));
        }
    }
    let masses = aligned_masses(curve, lo, hi, TAIL_FIT_TARGETS)?;
    let samples: Vec<(f64, f64, f64)> = masses
        .par_iter()
        .map(|&s| (s, point_at_mass(curve, s).distance(), inverter.density(s)))
        .collect();
    if samples.len() < 4 {
        return domain("tail window holds fewer than 4 aligned curve points");
    }
    if let Some(&(s, _, p)) = samples.iter().find(|(_, _, p)| !(*p > 0.0)) {
        return Err(Error::Accuracy(format!(
            "inverted density {p:e} at mass {s} is not positive"
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|(_, l, _)| l.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, _, p)| p.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    Ok(TailFit {
        fitted_exponent: line.slope,
        window,
        samples,
    })
}

/// Smallest `y` on a grid over `[y_from, y_to]` beyond which the leading tail
/// stays within `tolerance` (relative) of the inverted density.
pub fn tail_agreement_threshold(
    config: &StableLawConfig,
    y_from: f64,
    y_to: f64,
    n: usize,
    tolerance: f64,
) -> Result<Option<f64>> {
    let inverter = StableInverter::new(config)?;
    let ys = geometric_grid(y_from, y_to, n)?;
    let dens = inverter.density_grid(&ys);
    let mut threshold = None;
    for (y, p) in ys.iter().zip(&dens).rev() {
        let lead = leading_tail(*y, config.mu)?;
        if (lead - p).abs() / p.abs() <= tolerance {
            threshold = Some(*y);
        } else {
            break;
        }
    }
    Ok(threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentStatus {
    Finite,
    Infinite,
}

/// `<L^q>` under the fractalized tail `L^{-α(μ+1)}` is infinite iff `μ <= q/α`.
pub fn moment_finiteness(mu: f64, alpha: f64, order: u32) -> Result<MomentStatus> {
    if order != 1 && order != 2 {
        return domain(format!("moment order must be 1 or 2, got {order}"));
    }
    if !(alpha > 0.0 && mu > 0.0) {
        return domain(format!(
            "need mu > 0 and alpha > 0, got mu = {mu}, alpha = {alpha}"
        ));
    }
    Ok(if mu <= order as f64 / alpha {
        MomentStatus::Infinite
    } else {
        MomentStatus::Finite
    })
}
