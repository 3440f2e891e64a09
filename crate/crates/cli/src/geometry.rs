use clap::Args;
use koch_walk::fractal_calculus::staircase;
use koch_walk::koch_curve::build_curve;

use crate::error::{invalid, CliResult};
use crate::table::Table;

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Construction depth (4^depth segments).
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub depth: u32,
    /// Number of equally spaced parameters u in [0, 1].
    #[arg(long, default_value_t = 1025)]
    pub points: usize,
}

impl CurveArgs {
    pub fn config(&self, name: &str) -> String {
        format!("{name} --depth {} --points {}", self.depth, self.points)
    }
}

/// `u,x,y,L` along the curve.
pub fn curve(args: &CurveArgs) -> CliResult<Table> {
    if args.points < 2 {
        return invalid("--points must be at least 2");
    }
    let c = build_curve(args.depth)?;
    let mut table = Table::new(args.config("curve"), &["u", "x", "y", "L"]);
    let last = (args.points - 1) as f64;
    for i in 0..args.points {
        let u = i as f64 / last;
        let p = c.point_at(u)?;
        table.push(vec![u.into(), p.x.into(), p.y.into(), p.norm().into()]);
    }
    Ok(table)
}

/// `u,S,L,ratio` with `ratio = S / L^α`, for `u` in `(0, 1]`.
pub fn staircase_table(args: &CurveArgs) -> CliResult<Table> {
    if args.points < 1 {
        return invalid("--points must be at least 1");
    }
    let c = build_curve(args.depth)?;
    let mut table = Table::new(args.config("staircase"), &["u", "S", "L", "ratio"]);
    for i in 1..=args.points {
        let u = i as f64 / args.points as f64;
        let s = staircase(&c, u)?;
        let l = c.euclidean_distance(u)?;
        table.push(vec![
            u.into(),
            s.into(),
            l.into(),
            (s / l.powf(c.alpha())).into(),
        ]);
    }
    Ok(table)
}
