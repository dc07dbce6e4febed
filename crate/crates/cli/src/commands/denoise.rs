use std::io::{self, Write};
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use tunefree_core::{matrix_fit, matrix_fit_with_noise, DenseMatrix, GaussianSampler, MatrixFit};

use crate::csvio::{read_table, write_matrix};
use crate::error::{CliError, CliResult};
use crate::output::{emit, json_line, resolve_format, write_file, Format};

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Observed matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Seed of the auxiliary noise matrix.
    #[arg(long, required_unless_present = "noise_file")]
    pub seed: Option<u64>,
    /// Replay a stored noise matrix (same shape as the input).
    #[arg(long)]
    pub noise_file: Option<PathBuf>,
    /// Also write the estimated matrix to this CSV file.
    #[arg(long)]
    pub matrix_output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub record: String,
    pub seed: Option<u64>,
    pub noise_file: Option<String>,
    pub rows: usize,
    pub cols: usize,
    pub sigma_hat: f64,
    pub theta: f64,
    pub nuclear_y: f64,
    pub nuclear_z: f64,
    pub budget: f64,
    /// Singular values of the input, decreasing.
    pub singular_values: Vec<f64>,
    /// Singular values of the estimate.
    pub shrunk_singular_values: Vec<f64>,
    /// Number of nonzero shrunk singular values.
    pub rank: usize,
    /// `|Y - M_hat|_F^2`.
    pub residual_sq: f64,
    pub m_hat: DenseMatrix,
}

pub fn run(args: &DenoiseArgs) -> CliResult<DenoiseReport> {
    let y = read_table(&args.input)?.data;
    let fit: MatrixFit = match &args.noise_file {
        Some(path) => {
            let z = read_table(path)?.data;
            if z.shape() != y.shape() {
                return Err(CliError::Input(format!(
                    "{}: noise is {}x{}, input is {}x{}",
                    path.display(),
                    z.nrows(),
                    z.ncols(),
                    y.nrows(),
                    y.ncols()
                )));
            }
            matrix_fit_with_noise(&y, &z)?
        }
        None => matrix_fit(&y, &GaussianSampler::new(args.seed.unwrap_or_default(), 0))?,
    };
    let shrunk: Vec<f64> = fit.singular_values.iter().map(|s| (s - fit.theta).max(0.0)).collect();
    Ok(DenoiseReport {
        record: "denoise".into(),
        seed: args.seed,
        noise_file: args.noise_file.as_ref().map(|p| p.display().to_string()),
        rows: y.nrows(),
        cols: y.ncols(),
        sigma_hat: fit.sigma_hat,
        theta: fit.theta,
        nuclear_y: fit.nuclear_y,
        nuclear_z: fit.nuclear_z,
        budget: fit.budget,
        rank: shrunk.iter().filter(|&&s| s > 0.0).count(),
        singular_values: fit.singular_values,
        shrunk_singular_values: shrunk,
        residual_sq: (&y - &fit.m_hat).norm_squared(),
        m_hat: fit.m_hat,
    })
}

fn write_pretty(w: &mut dyn Write, r: &DenoiseReport) -> io::Result<()> {
    writeln!(w, "{} x {} matrix, estimated rank {}", r.rows, r.cols, r.rank)?;
    writeln!(w, "sigma_hat     {:.6}", r.sigma_hat)?;
    writeln!(w, "theta         {:.6}", r.theta)?;
    writeln!(w, "|Y|_* / |Z|_* {:.6} / {:.6}", r.nuclear_y, r.nuclear_z)?;
    writeln!(w, "budget        {:.6}", r.budget)?;
    writeln!(w, "residual^2    {:.6}", r.residual_sq)?;
    writeln!(w, "{:>5} {:>14} {:>14}", "i", "singular", "shrunk")?;
    for (i, (s, t)) in r.singular_values.iter().zip(&r.shrunk_singular_values).enumerate() {
        writeln!(w, "{i:>5} {s:>14.6} {t:>14.6}")?;
    }
    Ok(())
}

/// The estimate as CSV, preceded by the scalar diagnostics as comments.
fn write_csv(w: &mut dyn Write, r: &DenoiseReport) -> io::Result<()> {
    if let Some(seed) = r.seed {
        writeln!(w, "# seed = {seed}")?;
    }
    if let Some(path) = &r.noise_file {
        writeln!(w, "# noise_file = {path}")?;
    }
    writeln!(w, "# sigma_hat = {}", r.sigma_hat)?;
    writeln!(w, "# theta = {}", r.theta)?;
    writeln!(w, "# budget = {}", r.budget)?;
    let shrunk: Vec<String> = r.shrunk_singular_values.iter().map(|s| s.to_string()).collect();
    writeln!(w, "# shrunk_singular_values = {}", shrunk.join(" "))?;
    write_matrix(w, &r.m_hat, None)
}

pub fn execute(args: &DenoiseArgs) -> CliResult<()> {
    let report = run(args)?;
    if let Some(path) = &args.matrix_output {
        write_file(path, |w| write_matrix(w, &report.m_hat, None))?;
    }
    let format = resolve_format(args.format, args.output.as_deref());
    emit(args.output.as_ref(), |w| match format {
        Format::JsonLines => json_line(w, &report),
        Format::Csv => write_csv(w, &report),
        Format::PrettyTable => write_pretty(w, &report),
    })
}
