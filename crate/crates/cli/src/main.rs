//! `borelsum`: checks, formal series, Borel-plane solves and resummation
//! for problems given as spec files (see docs/problem-spec.md).

mod artifacts;
mod commands;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use borelsum_core::BorelError;
use clap::{Args, Parser, Subcommand};

use artifacts::Artifacts;

#[derive(Parser)]
#[command(name = "borelsum", version, about = "Borel-plane solver and resummation for nonlinear evolution PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Problem spec file.
    #[arg(long)]
    problem: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// `key=value` override: a solver option or a command parameter. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_kv)]
    set: Vec<(String, String)>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the problem: structure, derivative budget, cone condition.
    Check(Common),
    /// Write the problem in normalized direct form.
    Normalize(Common),
    /// Formal large-x series solution.
    Series(Common),
    /// Solve the convolution equation on the Borel-plane grid.
    SolveBorel(Common),
    /// Solve, then Laplace-transform back to x.
    Resum(Common),
    /// Acceleration of the Borel solution (needs growth_nu and growth_bound).
    Accelerate(Common),
    /// Small-time scaled solve of the Harry-Dym preset.
    HarryDym(Common),
    /// Compare the resummed solution with the finite-difference integrator.
    OracleCompare(Common),
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Exit 1 for bad input, 2 when the computation itself fails.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) | Failure::Io(_) => 2,
        }
    }
    pub fn status(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation-failure",
            Failure::Numerical(_) => "numerical-failure",
            Failure::Io(_) => "io-failure",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<BorelError> for Failure {
    fn from(e: BorelError) -> Self {
        use BorelError::*;
        let msg = e.to_string();
        match e {
            Parse { .. }
            | InvalidProblem(_)
            | NonQuasilinear(_)
            | SettingRejected(_)
            | ConeNotVerified
            | NoGrowthCertificate(_)
            | Unsupported(_)
            | NonTransformable(_) => Failure::Validation(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("BORELSUM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Check(c) => ("check", c),
        Command::Normalize(c) => ("normalize", c),
        Command::Series(c) => ("series", c),
        Command::SolveBorel(c) => ("solve-borel", c),
        Command::Resum(c) => ("resum", c),
        Command::Accelerate(c) => ("accelerate", c),
        Command::HarryDym(c) => ("harry-dym", c),
        Command::OracleCompare(c) => ("oracle-compare", c),
    };
    let settings: BTreeMap<String, String> = common.set.iter().cloned().collect();
    let mut art = match Artifacts::new(&common.out) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("borelsum: {e}");
            return ExitCode::from(e.code());
        }
    };
    let outcome = commands::run(name, &common.problem, settings.clone(), &mut art);
    let finished = art.finish(name, &common.problem, &settings, &outcome);
    match outcome.and(finished) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("borelsum {name}: {e}");
            ExitCode::from(e.code())
        }
    }
}
