use clap::Args;
use koch_walk::fractal_calculus::StaircaseTable;
use koch_walk::koch_curve::{build_curve, FractalCurve};
use koch_walk::passage::{
    aligned_delta, first_passage_pmf_exact, first_passage_sim, lmax_profile, min_time,
};
use koch_walk::walker::{
    gaussian_density_discrete, simulate_walks, walk_probability, Boundary, WalkConfig,
};

use crate::error::{invalid, CliResult};
use crate::table::{Cell, Table};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Largest `--tcap` for which the exact first-passage column is computed.
const EXACT_FPT_CAP: u64 = 20_000;

#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub depth: u32,
    /// Mass per step; defaults to the aligned step S(1)/4^depth.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Duration of one step.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// unbounded | reflecting (reflecting keeps the walk on [0, S(1)]).
    #[arg(long, default_value_t = Boundary::Unbounded)]
    pub boundary: Boundary,
    /// Starting mass s0.
    #[arg(long, default_value_t = 0.0)]
    pub start: f64,
}

impl LatticeArgs {
    fn resolve(&self, n_steps: u32) -> CliResult<(FractalCurve, WalkConfig)> {
        let curve = build_curve(self.depth)?;
        let delta = self.delta.unwrap_or_else(|| aligned_delta(&curve));
        let config = WalkConfig {
            delta,
            tau: self.tau,
            n_steps,
            seed: self.seed,
            start_mass: self.start,
            boundary: self.boundary,
        };
        config.validate(&curve)?;
        Ok((curve, config))
    }

    fn config(&self, config: &WalkConfig) -> String {
        format!(
            "--depth {} --delta {} --tau {} --seed {} --boundary {} --start {}",
            self.depth, config.delta, config.tau, config.seed, config.boundary, config.start_mass
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Number of steps N.
    #[arg(long, default_value_t = 16)]
    pub steps: u32,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

/// `k,count,prob_exact,prob_gaussian`: simulated endpoint counts against the
/// exact unbounded law and its Gaussian approximation `2/√(2πN) e^{-k²/2N}`
/// (the factor 2 accounts for the parity of the lattice).
pub fn walk(args: &WalkArgs) -> CliResult<Table> {
    if args.trials == 0 {
        return invalid("--trials must be at least 1");
    }
    let (curve, config) = args.lattice.resolve(args.steps)?;
    let hist = simulate_walks(&curve, &config, args.trials)?;
    let name = format!(
        "walk {} --steps {} --trials {}",
        args.lattice.config(&config),
        args.steps,
        args.trials
    );
    let mut table = Table::new(name, &["k", "count", "prob_exact", "prob_gaussian"]);
    let n = args.steps as i64;
    let lo = hist.counts.keys().next().map_or(-n, |&k| k.min(-n));
    let hi = hist.counts.keys().next_back().map_or(n, |&k| k.max(n));
    for k in (lo..=hi).filter(|k| (k + n).rem_euclid(2) == 0) {
        let exact = walk_probability(args.steps, k)?;
        let gauss = if args.steps == 0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            2.0 * gaussian_density_discrete(args.steps, config.delta, k as f64 * config.delta)?
        };
        table.push(vec![
            k.into(),
            hist.count(k).into(),
            exact.into(),
            gauss.into(),
        ]);
    }
    if config.boundary == Boundary::Unbounded {
        table.note("tv_to_exact", &[hist.total_variation_to_exact()?.into()]);
    }
    table.note("mean_offset", &[hist.mean_offset().into()]);
    table.note("offset_variance", &[hist.offset_variance().into()]);
    Ok(table)
}

#[derive(Debug, Clone, Args)]
pub struct FptArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Target lattice offset k (non-zero).
    #[arg(long, default_value_t = 1)]
    pub target: i64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Censoring time in steps.
    #[arg(long, default_value_t = 64)]
    pub tcap: u64,
}

/// `n,count,p_sim,p_exact` for first passage times `n = 1..=tcap`.
pub fn fpt(args: &FptArgs) -> CliResult<Table> {
    if args.trials == 0 {
        return invalid("--trials must be at least 1");
    }
    if args.target == 0 {
        return invalid("--target must be non-zero");
    }
    let (curve, config) = args.lattice.resolve(0)?;
    let sample = first_passage_sim(&curve, &config, args.target, args.trials, args.tcap)?;
    let exact = if config.boundary == Boundary::Unbounded && args.tcap <= EXACT_FPT_CAP {
        Some(first_passage_pmf_exact(args.target, args.tcap)?)
    } else {
        None
    };
    let name = format!(
        "fpt {} --target {} --trials {} --tcap {}",
        args.lattice.config(&config),
        args.target,
        args.trials,
        args.tcap
    );
    let mut table = Table::new(name, &["n", "count", "p_sim", "p_exact"]);
    let pmf = sample.pmf();
    let mut counts = vec![0u64; pmf.len()];
    for &t in &sample.hitting_times {
        counts[t as usize] += 1;
    }
    for (n, &count) in counts.iter().enumerate().skip(1) {
        let p_exact = exact.as_ref().map_or(f64::NAN, |e| e[n]);
        table.push(vec![
            (n as u64).into(),
            count.into(),
            pmf[n].into(),
            p_exact.into(),
        ]);
    }
    let bound = min_time(sample.target_mass, config.tau, config.delta)? / config.tau;
    table.note("min_time_bound_steps", &[bound.into()]);
    match sample.min_time() {
        Some(t) => table.note("observed_min_steps", &[t.into()]),
        None => table.note("observed_min_steps", &["none".into()]),
    }
    table.note(
        "censored",
        &[sample.censored.into(), sample.censored_fraction().into()],
    );
    if let Some(e) = &exact {
        let mut tv: f64 = pmf.iter().zip(e).map(|(a, b)| (a - b).abs()).sum();
        tv += (sample.censored_fraction() - (1.0 - e.iter().sum::<f64>())).abs();
        table.note("tv_to_exact", &[(0.5 * tv).into()]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Args)]
pub struct LmaxArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub depth: u32,
    /// Mass per step; defaults to S(1)/4^depth.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Number of budgets M; defaults to the whole curve, S(1)/delta.
    #[arg(long)]
    pub steps: Option<u32>,
}

/// `t_min,L_max` reachability envelope.
pub fn lmax(args: &LmaxArgs) -> CliResult<Table> {
    let curve = build_curve(args.depth)?;
    let table_s = StaircaseTable::new(&curve, args.depth)?;
    let delta = args.delta.unwrap_or_else(|| aligned_delta(&curve));
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("--delta must be > 0, got {delta}"));
    }
    let steps = match args.steps {
        Some(m) => m,
        None => (table_s.total_mass() / delta * (1.0 + 1e-12)).floor() as u32,
    };
    let profile = lmax_profile(&table_s, args.tau, delta, steps)?;
    let name = format!(
        "lmax --depth {} --delta {} --tau {} --steps {}",
        args.depth, delta, args.tau, steps
    );
    let mut table = Table::new(name, &["t_min", "L_max"]);
    for &(t, l) in &profile.records {
        table.push(vec![Cell::Real(t), Cell::Real(l)]);
    }
    table.note(
        "longest_plateau",
        &[(profile.longest_plateau() as u64).into()],
    );
    Ok(table)
}
