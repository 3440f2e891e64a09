//! Unbiased random walks with a fixed mass step Δ along the curve.
//!
//! Positions live on the lattice `s₀ + kΔ` of the mass coordinate and are
//! tracked by the integer offset `k`. The curve point of a position is read
//! through `J⁻¹` on the infinite curve (see [`crate::fractal_calculus`]).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{domain, Error, Result};
use crate::fractal_calculus::{point_at_mass, total_mass, CurvePoint};
use crate::koch_curve::FractalCurve;

/// Largest step count for which exact 64-bit path counts are returned.
pub const EXACT_COUNT_CAP: u32 = 60;

/// Trials handed to one rayon task; fixed so chunking never depends on the
/// worker count.
const TRIAL_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The walk lives on the whole lattice of the infinite curve.
    Unbounded,
    /// Steps that would leave `[0, S(1)]` are turned around.
    Reflecting,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unbounded" => Ok(Boundary::Unbounded),
            "reflecting" => Ok(Boundary::Reflecting),
            other => domain(format!(
                "unknown boundary policy '{other}' (expected unbounded | reflecting)"
            )),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Unbounded => "unbounded",
            Boundary::Reflecting => "reflecting",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Mass covered by every step.
    pub delta: f64,
    /// Duration of one step.
    pub tau: f64,
    pub n_steps: u32,
    pub seed: u64,
    /// Starting position `s₀` in the mass coordinate.
    pub start_mass: f64,
    pub boundary: Boundary,
}

impl WalkConfig {
    /// Unbounded walk from the origin with `τ = 1`.
    pub fn new(delta: f64, n_steps: u32, seed: u64) -> Self {
        Self {
            delta,
            tau: 1.0,
            n_steps,
            seed,
            start_mass: 0.0,
            boundary: Boundary::Unbounded,
        }
    }

    pub fn validate(&self, curve: &FractalCurve) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return domain(format!("walk step mass delta = {} must be > 0", self.delta));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return domain(format!("walk step time tau = {} must be > 0", self.tau));
        }
        if !self.start_mass.is_finite() {
            return domain("walk start mass must be finite");
        }
        if self.boundary == Boundary::Reflecting {
            let total = total_mass(curve);
            if !(0.0..=total).contains(&self.start_mass) {
                return domain(format!(
                    "reflecting walk must start inside [0, S(1) = {total}], got {}",
                    self.start_mass
                ));
            }
            if 2.0 * self.delta > total {
                return domain(format!(
                    "reflecting walk needs delta <= S(1)/2 = {}, got {}",
                    total / 2.0,
                    self.delta
                ));
            }
        }
        Ok(())
    }

    /// Curve point of lattice offset `k`.
    pub fn position(&self, curve: &FractalCurve, offset: i64) -> CurvePoint {
        point_at_mass(curve, self.start_mass + offset as f64 * self.delta)
    }
}

/// Endpoint histogram over lattice offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkHistogram {
    pub n_steps: u32,
    pub counts: BTreeMap<i64, u64>,
    pub n_trials: u64,
}

impl WalkHistogram {
    fn empty(n_steps: u32) -> Self {
        Self {
            n_steps,
            counts: BTreeMap::new(),
            n_trials: 0,
        }
    }

    fn merge(mut self, other: WalkHistogram) -> Self {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.n_trials += other.n_trials;
        self
    }

    pub fn count(&self, offset: i64) -> u64 {
        self.counts.get(&offset).copied().unwrap_or(0)
    }

    pub fn frequency(&self, offset: i64) -> f64 {
        self.count(offset) as f64 / self.n_trials as f64
    }

    pub fn mean_offset(&self) -> f64 {
        let total: f64 = self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum();
        total / self.n_trials as f64
    }

    pub fn offset_variance(&self) -> f64 {
        let mean = self.mean_offset();
        let total: f64 = self
            .counts
            .iter()
            .map(|(&k, &c)| (k as f64 - mean).powi(2) * c as f64)
            .sum();
        total / self.n_trials as f64
    }

    /// Total-variation distance to the exact unbounded endpoint law.
    pub fn total_variation_to_exact(&self) -> Result<f64> {
        let n = self.n_steps as i64;
        let mut tv = 0.0;
        for k in -n..=n {
            tv += (self.frequency(k) - walk_probability(self.n_steps, k)?).abs();
        }
        // offsets outside [-N, N] have exact probability zero
        let outside: u64 = self
            .counts
            .iter()
            .filter(|(k, _)| k.abs() > n)
            .map(|(_, c)| c)
            .sum();
        tv += outside as f64 / self.n_trials as f64;
        Ok(tv / 2.0)
    }
}

/// Number of `N`-step ±Δ paths from offset 0 to offset `k`, by iterating the
/// recursion `C(N, k) = C(N-1, k-1) + C(N-1, k+1)`.
pub fn count_walks_exact(n_steps: u32, offset: i64) -> Result<u64> {
    Ok(count_row(n_steps)?
        .get((offset + n_steps as i64) as usize)
        .filter(|_| offset.abs() <= n_steps as i64)
        .copied()
        .unwrap_or(0))
}

/// `C(N, k)` for `k = -N..=N`.
pub fn count_row(n_steps: u32) -> Result<Vec<u64>> {
    if n_steps > EXACT_COUNT_CAP {
        return Err(Error::Capacity(format!(
            "exact walk counts are limited to N <= {EXACT_COUNT_CAP}, got {n_steps}"
        )));
    }
    let width = 2 * n_steps as usize + 1;
    let centre = n_steps as usize;
    let mut row = vec![0u64; width];
    row[centre] = 1;
    for _ in 0..n_steps {
        let mut next = vec![0u64; width];
        for j in 0..width {
            let left = if j > 0 { row[j - 1] } else { 0 };
            let right = if j + 1 < width { row[j + 1] } else { 0 };
            next[j] = left + right;
        }
        row = next;
    }
    Ok(row)
}

/// `P(N, k) = C(N, k) / 2^N`. Beyond the exact-count cap the binomial is
/// evaluated in log space.
pub fn walk_probability(n_steps: u32, offset: i64) -> Result<f64> {
    let n = n_steps as i64;
    if offset.abs() > n || (n + offset) % 2 != 0 {
        return Ok(0.0);
    }
    if n_steps <= EXACT_COUNT_CAP {
        return Ok(count_walks_exact(n_steps, offset)? as f64 / 2f64.powi(n_steps as i32));
    }
    let up = ((n + offset) / 2) as u64;
    Ok((ln_binomial(n as u64, up) - n as f64 * std::f64::consts::LN_2).exp())
}

/// Deterministic generator for trial `trial`: the seed selects the key and
/// the trial index selects the ChaCha stream.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Source of fair ±1 steps drawn 64 at a time.
pub(crate) struct StepSource {
    rng: ChaCha8Rng,
    bits: u64,
    left: u32,
}

impl StepSource {
    pub(crate) fn new(seed: u64, trial: u64) -> Self {
        Self {
            rng: trial_rng(seed, trial),
            bits: 0,
            left: 0,
        }
    }

    pub(crate) fn next_step(&mut self) -> i64 {
        if self.left == 0 {
            self.bits = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.bits & 1;
        self.bits >>= 1;
        self.left -= 1;
        if bit == 1 {
            1
        } else {
            -1
        }
    }
}

/// Lattice bounds `[k_lo, k_hi]` for a reflecting walk.
pub(crate) fn reflecting_bounds(curve: &FractalCurve, config: &WalkConfig) -> (i64, i64) {
    let total = total_mass(curve);
    let slack = 1e-9;
    let lo = -((config.start_mass / config.delta + slack).floor() as i64);
    let hi = ((total - config.start_mass) / config.delta + slack).floor() as i64;
    (lo, hi)
}

/// Applies one proposed step under the boundary policy.
pub(crate) fn apply_step(offset: i64, step: i64, bounds: Option<(i64, i64)>) -> i64 {
    let proposal = offset + step;
    match bounds {
        Some((lo, hi)) if proposal < lo || proposal > hi => offset - step,
        _ => proposal,
    }
}

/// Monte Carlo endpoint histogram of `n_trials` walks. Trial `i` always uses
/// the stream `(seed, i)`, so the result does not depend on parallelism.
pub fn simulate_walks(
    curve: &FractalCurve,
    config: &WalkConfig,
    n_trials: u64,
) -> Result<WalkHistogram> {
    config.validate(curve)?;
    if n_trials == 0 {
        return domain("simulate_walks needs at least one trial");
    }
    let bounds = match config.boundary {
        Boundary::Unbounded => None,
        Boundary::Reflecting => Some(reflecting_bounds(curve, config)),
    };
    let chunks = n_trials.div_ceil(TRIAL_CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut hist = WalkHistogram::empty(config.n_steps);
            let end = ((chunk + 1) * TRIAL_CHUNK).min(n_trials);
            for trial in chunk * TRIAL_CHUNK..end {
                let mut steps = StepSource::new(config.seed, trial);
                let mut k = 0i64;
                for _ in 0..config.n_steps {
                    k = apply_step(k, steps.next_step(), bounds);
                }
                *hist.counts.entry(k).or_insert(0) += 1;
                hist.n_trials += 1;
            }
            hist
        })
        .reduce(
            || WalkHistogram::empty(config.n_steps),
            WalkHistogram::merge,
        );
    Ok(hist)
}

/// `(1/√(2πN)) exp(-s² / (2Δ²N))` for a mass displacement `s = J(θ) - J(θ')`.
pub fn gaussian_density_discrete(n_steps: u32, delta: f64, s: f64) -> Result<f64> {
    if n_steps == 0 {
        return domain("discrete Gaussian density needs N >= 1");
    }
    if !(delta > 0.0) {
        return domain(format!("delta = {delta} must be > 0"));
    }
    let n = n_steps as f64;
    Ok((-(s * s) / (2.0 * delta * delta * n)).exp() / (2.0 * PI * n).sqrt())
}

/// `(1/√(2πAt)) exp(-s² / (2At))`, normalised in `ds`.
pub fn continuum_density(t: f64, diffusivity: f64, s: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("continuum density needs t > 0, got {t}"));
    }
    if !(diffusivity > 0.0) {
        return domain(format!("continuum density needs A > 0, got {diffusivity}"));
    }
    let var = diffusivity * t;
    Ok((-(s * s) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}
