use std::io::{self, Write};
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use tunefree_core::estimators::regression_fit_with_noise;
use tunefree_core::{regression_fit, DenseMatrix, DenseVector, GaussianSampler, RegressionFit};

use crate::csvio::{read_table, read_vector};
use crate::error::{CliError, CliResult};
use crate::output::{emit, json_line, resolve_format, write_file, Format};

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Design matrix CSV (n rows, p columns).
    #[arg(long)]
    pub design: PathBuf,
    /// Response CSV with a single column of length n.
    #[arg(long)]
    pub response: PathBuf,
    /// Seed of the auxiliary noise draw.
    #[arg(long, required_unless_present = "noise_file")]
    pub seed: Option<u64>,
    /// Replay a stored noise vector instead of drawing one.
    #[arg(long)]
    pub noise_file: Option<PathBuf>,
    /// Centre and rescale non-constant design columns before fitting.
    #[arg(long, overrides_with = "no_standardize", default_value_t = true)]
    pub standardize: bool,
    #[arg(long = "no-standardize")]
    pub no_standardize: bool,
    /// Overrides the solver tolerances.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the coefficient table to this CSV file.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Column transformation applied before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    /// Constant columns, passed through untouched.
    pub constant_columns: Vec<usize>,
    pub means: Vec<f64>,
    /// Root mean square of each centred column (1 for constant columns).
    pub scales: Vec<f64>,
}

impl Standardization {
    /// Centres every non-constant column and scales it to `|x_j| = sqrt(n)`.
    pub fn fit(x: &DenseMatrix) -> Self {
        let n = x.nrows() as f64;
        let mut constant_columns = Vec::new();
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        for (j, col) in x.column_iter().enumerate() {
            let mean = col.sum() / n;
            let rms = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            if rms <= 1e-12 * col.amax().max(1e-300) || rms == 0.0 {
                constant_columns.push(j);
                means.push(0.0);
                scales.push(1.0);
            } else {
                means.push(mean);
                scales.push(rms);
            }
        }
        Standardization {
            constant_columns,
            means,
            scales,
        }
    }

    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.means[j]) / self.scales[j])
    }

    /// Coefficients and offset on the original scale: the fitted mean is
    /// `x . coefficients + offset`.
    pub fn back_transform(&self, beta: &[f64]) -> (Vec<f64>, f64) {
        let coef: Vec<f64> = beta.iter().zip(&self.scales).map(|(b, s)| b / s).collect();
        let offset = -coef.iter().zip(&self.means).map(|(c, m)| c * m).sum::<f64>();
        (coef, offset)
    }
}

/// Everything the regress command reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressReport {
    pub record: String,
    pub seed: Option<u64>,
    pub noise_file: Option<String>,
    pub n: usize,
    pub p: usize,
    pub sigma_hat: f64,
    /// Largest column norm over `sqrt(n)` of the matrix actually fitted.
    pub gamma: f64,
    pub m1: f64,
    pub m2: f64,
    pub rank_k: usize,
    pub budget: f64,
    /// `|Y' - X beta_hat|^2` on the fitted design.
    pub residual_sq: f64,
    /// `|Y - X beta_hat|^2`.
    pub total_residual_sq: f64,
    pub support: Vec<usize>,
    /// Coefficients of the fitted (possibly standardized) design.
    pub beta_hat: Vec<f64>,
    /// Coefficients on the original design scale.
    pub coefficients: Vec<f64>,
    /// Added to `x . coefficients` to get the fitted mean.
    pub offset: f64,
    pub standardization: Option<Standardization>,
    pub column_names: Option<Vec<String>>,
}

fn fit(x: &DenseMatrix, y: &DenseVector, args: &RegressArgs) -> CliResult<RegressionFit> {
    let mut settings = tunefree_core::SolverSettings::default();
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
        }
        settings = settings.with_tolerance(tol);
    }
    let fit = match &args.noise_file {
        Some(path) => {
            let z = read_vector(path)?;
            if z.len() != y.len() {
                return Err(CliError::Input(format!(
                    "{}: noise has {} entries, response has {}",
                    path.display(),
                    z.len(),
                    y.len()
                )));
            }
            regression_fit_with_noise(x, y, &z, &settings)?
        }
        None => regression_fit(x, y, &GaussianSampler::new(args.seed.unwrap_or_default(), 0), &settings)?,
    };
    Ok(fit)
}

pub fn run(args: &RegressArgs) -> CliResult<RegressReport> {
    let design = read_table(&args.design)?;
    let y = read_vector(&args.response)?;
    let x = design.data;
    if x.nrows() != y.len() {
        return Err(CliError::Input(format!(
            "design has {} rows but response has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    let standardization = (args.standardize && !args.no_standardize).then(|| Standardization::fit(&x));
    let fitted_x = match &standardization {
        Some(s) => s.apply(&x),
        None => x.clone(),
    };
    let f = fit(&fitted_x, &y, args)?;
    let (coefficients, offset) = match &standardization {
        Some(s) => s.back_transform(&f.beta_hat),
        None => (f.beta_hat.clone(), 0.0),
    };
    let mean = &fitted_x * DenseVector::from_column_slice(&f.beta_hat);
    Ok(RegressReport {
        record: "regress".into(),
        seed: args.seed,
        noise_file: args.noise_file.as_ref().map(|p| p.display().to_string()),
        n: x.nrows(),
        p: x.ncols(),
        sigma_hat: f.sigma_hat,
        gamma: f.gamma,
        m1: f.m1,
        m2: f.m2,
        rank_k: f.rank_k,
        budget: f.budget,
        residual_sq: f.residual_sq,
        total_residual_sq: (&y - mean).norm_squared(),
        support: f.support,
        beta_hat: f.beta_hat,
        coefficients,
        offset,
        standardization,
        column_names: design.header,
    })
}

/// Coefficient table: `index,beta_hat,coefficient,selected`.
pub fn write_coefficients(w: &mut dyn Write, r: &RegressReport) -> io::Result<()> {
    writeln!(w, "index,beta_hat,coefficient,selected")?;
    for (j, (b, c)) in r.beta_hat.iter().zip(&r.coefficients).enumerate() {
        let sel = u8::from(r.support.binary_search(&j).is_ok());
        writeln!(w, "{j},{b},{c},{sel}")?;
    }
    Ok(())
}

fn write_pretty(w: &mut dyn Write, r: &RegressReport) -> io::Result<()> {
    writeln!(w, "n = {}, p = {}, rank = {}", r.n, r.p, r.rank_k)?;
    writeln!(w, "sigma_hat     {:.6}", r.sigma_hat)?;
    writeln!(w, "gamma         {:.6}", r.gamma)?;
    writeln!(w, "M1 / M2       {:.6} / {:.6}", r.m1, r.m2)?;
    writeln!(w, "budget        {:.6}", r.budget)?;
    writeln!(w, "residual^2    {:.6} (projected), {:.6} (total)", r.residual_sq, r.total_residual_sq)?;
    writeln!(w, "offset        {:.6}", r.offset)?;
    writeln!(w, "support size  {}", r.support.len())?;
    writeln!(w, "{:>6} {:>16} {:>14} {:>14}", "index", "name", "beta_hat", "coefficient")?;
    for &j in &r.support {
        let name = r.column_names.as_ref().map(|h| h[j].as_str()).unwrap_or("");
        writeln!(w, "{:>6} {:>16} {:>14.6} {:>14.6}", j, name, r.beta_hat[j], r.coefficients[j])?;
    }
    Ok(())
}

fn write_csv(w: &mut dyn Write, r: &RegressReport) -> io::Result<()> {
    if let Some(seed) = r.seed {
        writeln!(w, "# seed = {seed}")?;
    }
    if let Some(path) = &r.noise_file {
        writeln!(w, "# noise_file = {path}")?;
    }
    writeln!(w, "# sigma_hat = {}", r.sigma_hat)?;
    writeln!(w, "# gamma = {}", r.gamma)?;
    writeln!(w, "# m1 = {}", r.m1)?;
    writeln!(w, "# m2 = {}", r.m2)?;
    writeln!(w, "# rank_k = {}", r.rank_k)?;
    writeln!(w, "# budget = {}", r.budget)?;
    writeln!(w, "# residual_sq = {}", r.residual_sq)?;
    writeln!(w, "# offset = {}", r.offset)?;
    write_coefficients(w, r)
}

pub fn execute(args: &RegressArgs) -> CliResult<()> {
    let report = run(args)?;
    if let Some(path) = &args.coefficients {
        write_file(path, |w| write_coefficients(w, &report))?;
    }
    let format = resolve_format(args.format, args.output.as_deref());
    emit(args.output.as_ref(), |w| match format {
        Format::JsonLines => json_line(w, &report),
        Format::Csv => write_csv(w, &report),
        Format::PrettyTable => write_pretty(w, &report),
    })
}
