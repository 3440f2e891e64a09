//! `kochwalk`: random walks and calculus on the von Koch curve.
//!
//! Every subcommand writes CSV: a `# config:` line holding the canonical flags
//! that reproduce the file, a header, data rows, then `#` notes. Exit status is
//! 0 on success, 2 for rejected input and 1 for numerical failures.

// Comparisons are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analysis;
mod error;
mod geometry;
mod repro;
mod table;
mod walks;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::table::Table;

#[derive(Debug, Parser)]
#[command(name = "kochwalk", version, about)]
struct Cli {
    /// Write the CSV here instead of stdout; an existing file is an error.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Allow --out to replace an existing file.
    #[arg(long, global = true)]
    force: bool,
    /// Echo the canonical configuration line on stderr.
    #[arg(long, global = true)]
    print_config: bool,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Points of the curve: u,x,y,L.
    Curve(geometry::CurveArgs),
    /// Staircase against distance: u,S,L,ratio.
    Staircase(geometry::CurveArgs),
    /// Endpoint law of fixed-mass-step walks: k,count,prob_exact,prob_gaussian.
    #[command(allow_negative_numbers = true)]
    Walk(walks::WalkArgs),
    /// Absolute moments and their exponents: t,L1,L2.
    #[command(allow_negative_numbers = true)]
    Moments(analysis::MomentsArgs),
    /// Stable densities: y,density,leading_tail (or u,L,S,density with --fractal).
    #[command(allow_negative_numbers = true)]
    Levy(analysis::LevyArgs),
    /// First passage times to offset k: n,count,p_sim,p_exact.
    #[command(allow_negative_numbers = true)]
    Fpt(walks::FptArgs),
    /// Reachability envelope: t_min,L_max.
    #[command(allow_negative_numbers = true)]
    Lmax(walks::LmaxArgs),
    /// Fourier transform on the curve: v,re,im.
    #[command(allow_negative_numbers = true)]
    Fourier(analysis::FourierArgs),
    /// Run the full reproduction pipeline and print a pass/fail table.
    Repro(repro::ReproArgs),
}

/// Runs the subcommand; the count is the number of failed `repro` checks.
fn execute(command: &Command) -> CliResult<(Table, usize)> {
    let table = match command {
        Command::Curve(a) => geometry::curve(a)?,
        Command::Staircase(a) => geometry::staircase_table(a)?,
        Command::Walk(a) => walks::walk(a)?,
        Command::Moments(a) => analysis::moments(a)?,
        Command::Levy(a) => analysis::levy(a)?,
        Command::Fpt(a) => walks::fpt(a)?,
        Command::Lmax(a) => walks::lmax(a)?,
        Command::Fourier(a) => analysis::fourier(a)?,
        Command::Repro(a) => return repro::repro(a),
    };
    Ok((table, 0))
}

fn write_output(path: &Path, text: &str, force: bool) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut options = OpenOptions::new();
    options.write(true);
    if force {
        options.create(true).truncate(true);
    } else {
        options.create_new(true);
    }
    let mut file = options.open(path).map_err(io)?;
    file.write_all(text.as_bytes()).map_err(io)
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return error::invalid("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("--threads: {e}")))?;
    }
    if !cli.force {
        if let Some(path) = cli.out.as_ref().filter(|p| p.exists()) {
            return error::invalid(format!(
                "{} already exists; pass --force to overwrite it",
                path.display()
            ));
        }
    }
    let (table, failed) = execute(&cli.command)?;
    let text = table.render();
    if cli.print_config {
        eprintln!("{}", text.lines().next().unwrap_or_default());
    }
    match &cli.out {
        Some(path) => write_output(path, &text, cli.force)?,
        None => print!("{text}"),
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kochwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
