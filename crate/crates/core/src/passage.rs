//! First passage times on the mass lattice and the reachability envelope
//! `L_max(t_min)`.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fractal_calculus::{point_at_mass, total_mass, StaircaseTable};
use crate::koch_curve::FractalCurve;
use crate::walker::{apply_step, reflecting_bounds, Boundary, StepSource, WalkConfig};

const LATTICE_SLACK: f64 = 1e-9;

/// Largest mass `tΔ/τ` a walker can cover in time `t = Mτ`.
pub fn max_mass(t: f64, tau: f64, delta: f64) -> Result<f64> {
    check_steps(tau, delta)?;
    let steps = t / tau;
    let whole = steps.round();
    if !(t >= 0.0) || (steps - whole).abs() > LATTICE_SLACK * whole.max(1.0) {
        return domain(format!(
            "t = {t} is not a non-negative whole number of steps tau = {tau}"
        ));
    }
    Ok(whole * delta)
}

/// Smallest time `τ ⌈s/Δ⌉` needed to cover mass `s`.
pub fn min_time(s: f64, tau: f64, delta: f64) -> Result<f64> {
    check_steps(tau, delta)?;
    if !(s >= 0.0) || !s.is_finite() {
        return domain(format!("mass s = {s} must be finite and >= 0"));
    }
    Ok(tau * lattice_steps(s, delta) as f64)
}

/// `⌈s/Δ⌉`, ignoring rounding noise on lattice-aligned masses.
fn lattice_steps(s: f64, delta: f64) -> u64 {
    let ratio = s / delta;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= LATTICE_SLACK * nearest.max(1.0) {
        nearest as u64
    } else {
        ratio.ceil() as u64
    }
}

fn check_steps(tau: f64, delta: f64) -> Result<()> {
    if tau > 0.0 && delta > 0.0 && tau.is_finite() && delta.is_finite() {
        Ok(())
    } else {
        domain(format!(
            "need tau > 0 and delta > 0, got tau = {tau}, delta = {delta}"
        ))
    }
}

/// Step function of `(t_min, L_max)` pairs ordered by `t_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct PassageProfile {
    pub records: Vec<(f64, f64)>,
}

impl PassageProfile {
    /// Lengths of the runs of equal consecutive `L_max` values (runs of one
    /// record count as length 1).
    pub fn plateau_lengths(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut current = 0usize;
        let mut last: Option<f64> = None;
        for &(_, l) in &self.records {
            if last == Some(l) {
                current += 1;
            } else {
                if current > 0 {
                    runs.push(current);
                }
                current = 1;
            }
            last = Some(l);
        }
        if current > 0 {
            runs.push(current);
        }
        runs
    }

    pub fn longest_plateau(&self) -> usize {
        self.plateau_lengths().into_iter().max().unwrap_or(0)
    }
}

/// `L_max(Mτ) = max_{1 <= j <= M} |w(J⁻¹(jΔ))|` for `M = 1..=m_steps`: the
/// farthest Euclidean distance reachable forward along the curve within the
/// mass budget `MΔ`.
pub fn lmax_profile(
    table: &StaircaseTable,
    tau: f64,
    delta: f64,
    m_steps: u32,
) -> Result<PassageProfile> {
    check_steps(tau, delta)?;
    let curve = table.curve();
    let total = total_mass(curve);
    let budget = m_steps as f64 * delta;
    if budget > total * (1.0 + LATTICE_SLACK) {
        return Err(Error::Capacity(format!(
            "mass budget {m_steps} x {delta} = {budget} exceeds the curve mass S(1) = {total}"
        )));
    }
    let mut running = 0.0f64;
    let records = (1..=m_steps)
        .map(|m| {
            let s = (m as f64 * delta).min(total);
            running = running.max(point_at_mass(curve, s).distance());
            (m as f64 * tau, running)
        })
        .collect();
    Ok(PassageProfile { records })
}

/// Aligned mass step `S(1) / 4^depth` used by default for the envelope.
pub fn aligned_delta(curve: &FractalCurve) -> f64 {
    total_mass(curve) / curve.segment_count() as f64
}

/// Simulated first passage times to the lattice offset `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FptSample {
    pub target_offset: i64,
    /// Mass between the start point and the target, `|k| Δ`.
    pub target_mass: f64,
    /// First hitting step of every uncensored trial, in trial order.
    pub hitting_times: Vec<u64>,
    /// Trials that had not reached the target after `t_cap` steps.
    pub censored: u64,
    pub t_cap: u64,
    pub n_trials: u64,
}

impl FptSample {
    /// Empirical `P(T = n)` for `n = 0..=t_cap`.
    pub fn pmf(&self) -> Vec<f64> {
        let mut counts = vec![0u64; self.t_cap as usize + 1];
        for &t in &self.hitting_times {
            counts[t as usize] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / self.n_trials as f64)
            .collect()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.n_trials as f64
    }

    pub fn min_time(&self) -> Option<u64> {
        self.hitting_times.iter().copied().min()
    }
}

/// Monte Carlo first passage to the offset `k` with trials censored at
/// `t_cap` steps. Trial `i` uses the random stream `(seed, i)`.
pub fn first_passage_sim(
    curve: &FractalCurve,
    config: &WalkConfig,
    target_offset: i64,
    n_trials: u64,
    t_cap: u64,
) -> Result<FptSample> {
    config.validate(curve)?;
    if target_offset == 0 {
        return domain("first passage target offset k must be non-zero");
    }
    if n_trials == 0 {
        return domain("first passage simulation needs at least one trial");
    }
    let bounds = match config.boundary {
        Boundary::Unbounded => None,
        Boundary::Reflecting => {
            let (lo, hi) = reflecting_bounds(curve, config);
            if target_offset < lo || target_offset > hi {
                return domain(format!(
                    "target offset {target_offset} is outside the reflecting range [{lo}, {hi}]"
                ));
            }
            Some((lo, hi))
        }
    };
    let times: Vec<Option<u64>> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut steps = StepSource::new(config.seed, trial);
            let mut k = 0i64;
            for n in 1..=t_cap {
                k = apply_step(k, steps.next_step(), bounds);
                if k == target_offset {
                    return Some(n);
                }
            }
            None
        })
        .collect();
    let censored = times.iter().filter(|t| t.is_none()).count() as u64;
    Ok(FptSample {
        target_offset,
        target_mass: target_offset.unsigned_abs() as f64 * config.delta,
        hitting_times: times.into_iter().flatten().collect(),
        censored,
        t_cap,
        n_trials,
    })
}

/// Exact `P(T = n)`, `n = 0..=n_max`, for the unbounded walk to offset `k`,
/// by propagating the lattice distribution with an absorbing target.
pub fn first_passage_pmf_exact(target_offset: i64, n_max: u64) -> Result<Vec<f64>> {
    if target_offset == 0 {
        return domain("first passage target offset k must be non-zero");
    }
    let reach = n_max as i64 + 1;
    let width = (2 * reach + 1) as usize;
    let index = |k: i64| (k + reach) as usize;
    let mut dist = vec![0.0; width];
    dist[index(0)] = 1.0;
    let mut pmf = vec![0.0; n_max as usize + 1];
    if target_offset.abs() > n_max as i64 {
        return Ok(pmf);
    }
    for slot in pmf.iter_mut().skip(1) {
        let mut next = vec![0.0; width];
        for j in 1..width - 1 {
            next[j] = 0.5 * (dist[j - 1] + dist[j + 1]);
        }
        let hit = index(target_offset);
        *slot = next[hit];
        next[hit] = 0.0;
        dist = next;
    }
    Ok(pmf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::koch_curve::build_curve;

    #[test]
    fn max_mass_examples() {
        assert_eq!(max_mass(0.0, 1.0, 0.01).unwrap(), 0.0);
        assert!((max_mass(10.0 * 0.3, 0.3, 0.01).unwrap() - 0.1).abs() < 1e-15);
        assert!((max_mass(7.0, 1.0, 0.25).unwrap() - 7.0 * 0.25).abs() < 1e-15);
        assert!(max_mass(2.5, 1.0, 0.1).is_err());
        assert!(max_mass(-1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn min_time_examples() {
        let (tau, delta) = (0.5, 0.01);
        assert_eq!(min_time(0.0, tau, delta).unwrap(), 0.0);
        assert_eq!(min_time(delta, tau, delta).unwrap(), tau);
        assert_eq!(min_time(1.5 * delta, tau, delta).unwrap(), 2.0 * tau);
        for m in [1u32, 7, 40] {
            let t = m as f64 * tau;
            assert_eq!(
                min_time(max_mass(t, tau, delta).unwrap(), tau, delta).unwrap(),
                t
            );
        }
        assert!(min_time(-0.1, tau, delta).is_err());
    }

    #[test]
    fn exact_pmf_small_cases() {
        let p1 = first_passage_pmf_exact(1, 5).unwrap();
        assert_eq!(p1[0], 0.0);
        assert_eq!(p1[1], 0.5);
        assert_eq!(p1[2], 0.0);
        assert_eq!(p1[3], 0.125);
        let p2 = first_passage_pmf_exact(-2, 4).unwrap();
        assert_eq!(p2[2], 0.25);
        assert_eq!(p2[4], 0.125);
        assert!(first_passage_pmf_exact(0, 4).is_err());
    }

    #[test]
    fn profile_first_record_and_capacity() {
        let c = build_curve(3).unwrap();
        let table = StaircaseTable::new(&c, 3).unwrap();
        let delta = aligned_delta(&c);
        let profile = lmax_profile(&table, 1.0, delta, 64).unwrap();
        assert_eq!(profile.records.len(), 64);
        let first = c.euclidean_distance(1.0 / 64.0).unwrap();
        assert!((profile.records[0].1 - first).abs() < 1e-14);
        assert!((profile.records[63].1 - 1.0).abs() < 1e-14);
        assert!(matches!(
            lmax_profile(&table, 1.0, delta, 65),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn plateau_lengths_counts_runs() {
        let p = PassageProfile {
            records: vec![(1.0, 0.1), (2.0, 0.2), (3.0, 0.2), (4.0, 0.2), (5.0, 0.3)],
        };
        assert_eq!(p.plateau_lengths(), vec![1, 3, 1]);
        assert_eq!(p.longest_plateau(), 3);
    }

    #[test]
    fn reflecting_target_must_be_reachable() {
        let c = build_curve(3).unwrap();
        let config = WalkConfig {
            boundary: Boundary::Reflecting,
            ..WalkConfig::new(aligned_delta(&c), 0, 1)
        };
        assert!(first_passage_sim(&c, &config, -1, 10, 10).is_err());
        let s = first_passage_sim(&c, &config, 3, 200, 10_000).unwrap();
        assert_eq!(s.censored, 0);
        assert!(s.hitting_times.iter().all(|&t| t >= 3 && t % 2 == 1));
    }
}
