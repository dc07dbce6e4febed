use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use tunefree_core::{risk_bounds, RiskBound, RiskProblem};

use crate::error::{CliError, CliResult};
use crate::output::{emit, json_line, resolve_format, Format};

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub problem: BoundsProblem,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BoundsProblem {
    /// Sparse regression rate and risk terms.
    Regression {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        /// l1 norm of the true coefficient vector.
        #[arg(long)]
        beta_l1: f64,
        /// Largest column norm over sqrt(n).
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Low-rank matrix rate and risk terms.
    Matrix {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        /// Nuclear norm of the true matrix.
        #[arg(long)]
        nuclear_norm: f64,
        /// Monte Carlo draws for the spectral-norm moments.
        #[arg(long, default_value_t = 20)]
        moment_samples: usize,
        /// Seed of the Monte Carlo draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub record: String,
    pub problem: RiskProblem,
    pub bound: RiskBound,
}

pub fn run(args: &BoundsArgs) -> CliResult<BoundsReport> {
    let problem = match args.problem {
        BoundsProblem::Regression {
            n,
            p,
            sigma,
            beta_l1,
            gamma,
        } => RiskProblem::Regression {
            n,
            p,
            sigma,
            beta0_l1: beta_l1,
            gamma,
        },
        BoundsProblem::Matrix {
            rows,
            cols,
            sigma,
            nuclear_norm,
            moment_samples,
            seed,
        } => RiskProblem::Matrix {
            rows,
            cols,
            sigma,
            nuclear_norm,
            moment_samples,
            seed,
        },
    };
    // Every failure here is a bad parameter, never a solver problem.
    let bound = risk_bounds(&problem).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(BoundsReport {
        record: "bounds".into(),
        problem,
        bound,
    })
}

/// Named scalar columns, in output order.
fn columns(r: &BoundsReport) -> Vec<(String, f64)> {
    let b = &r.bound;
    let mut out = Vec::new();
    if let Some(v) = b.r {
        out.push(("r".to_string(), v));
    }
    if let Some(v) = b.s {
        out.push(("s".to_string(), v));
    }
    for (i, t) in b.risk_terms.iter().enumerate() {
        out.push((format!("risk_term_{}", i + 1), *t));
    }
    out.push(("risk_bound".into(), b.bound_value));
    for (i, t) in b.sigma_terms.iter().enumerate() {
        out.push((format!("sigma_term_{}", i + 1), *t));
    }
    out.push(("a".into(), b.a));
    out.push(("m2".into(), b.m2_bound));
    out.push(("m4".into(), b.m4_bound));
    out.push(("sigma_sq_error_bound".into(), b.sigma_sq_error_bound));
    out
}

fn write_pretty(w: &mut dyn Write, r: &BoundsReport) -> io::Result<()> {
    writeln!(w, "constants C = 1")?;
    for (name, v) in columns(r) {
        writeln!(w, "{name:<22} {v:.6}")?;
    }
    Ok(())
}

fn write_csv(w: &mut dyn Write, r: &BoundsReport) -> io::Result<()> {
    let cols = columns(r);
    let names: Vec<&str> = cols.iter().map(|(n, _)| n.as_str()).collect();
    let values: Vec<String> = cols.iter().map(|(_, v)| v.to_string()).collect();
    writeln!(w, "{}", names.join(","))?;
    writeln!(w, "{}", values.join(","))
}

pub fn execute(args: &BoundsArgs) -> CliResult<()> {
    let report = run(args)?;
    let format = resolve_format(args.format, args.output.as_deref());
    emit(args.output.as_ref(), |w| match format {
        Format::JsonLines => json_line(w, &report),
        Format::Csv => write_csv(w, &report),
        Format::PrettyTable => write_pretty(w, &report),
    })
}
