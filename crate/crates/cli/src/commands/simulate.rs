use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tunefree_core::sim::{
    pretty_matrix_table, run_matrix_scenario, run_scenario, table1_scenarios, write_matrix_csv, write_report,
    MatrixReport, ScenarioReport, SimSettings,
};

use crate::error::{CliError, CliResult};
use crate::output::{emit, json_line, resolve_format, Format};
use crate::scenario::{parse_scenarios, ScenarioSpec};

/// Replications per scenario when neither the flag nor the file sets it.
pub const DEFAULT_REPLICATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The eight Gaussian-design comparison rows.
    Table1,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario set.
    #[arg(long, value_enum, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub preset: Option<Preset>,
    /// Scenario file (key-value blocks).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Base seed; per-replication seeds are derived from it.
    #[arg(long)]
    pub seed: u64,
    /// Replications per scenario; overrides the scenario file.
    #[arg(long)]
    pub replications: Option<usize>,
    /// 1-based rows of the preset to run, comma separated.
    #[arg(long, value_delimiter = ',', requires = "preset")]
    pub rows: Vec<usize>,
    /// Cross-validation folds for the Lasso comparison.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Overrides the solver tolerances.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Run replications one at a time.
    #[arg(long)]
    pub sequential: bool,
    /// Zero the wall-clock fields so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub struct SimulationOutput {
    pub regression: Vec<ScenarioReport>,
    pub matrix: Vec<MatrixReport>,
}

fn scenarios(args: &SimulateArgs) -> CliResult<Vec<ScenarioSpec>> {
    if args.replications == Some(0) {
        return Err(CliError::Input("--replications must be at least 1".into()));
    }
    let specs = match (&args.preset, &args.scenario) {
        (Some(Preset::Table1), _) => {
            let all = table1_scenarios(args.replications.unwrap_or(DEFAULT_REPLICATIONS), args.seed);
            if args.rows.is_empty() {
                all.into_iter().map(ScenarioSpec::Regression).collect()
            } else {
                let mut picked = Vec::new();
                for &r in &args.rows {
                    let sc = r
                        .checked_sub(1)
                        .and_then(|i| all.get(i))
                        .ok_or_else(|| CliError::Input(format!("--rows: row {r} is outside 1..={}", all.len())))?;
                    picked.push(ScenarioSpec::Regression(sc.clone()));
                }
                picked
            }
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let mut specs = parse_scenarios(&text, &path.display().to_string(), args.seed, args.replications.or(Some(DEFAULT_REPLICATIONS)))?;
            if let Some(r) = args.replications {
                for s in &mut specs {
                    match s {
                        ScenarioSpec::Regression(sc) => sc.replications = r,
                        ScenarioSpec::Matrix(sc) => sc.replications = r,
                    }
                }
            }
            specs
        }
        (None, None) => return Err(CliError::Input("one of --preset or --scenario is required".into())),
    };
    if specs.is_empty() {
        return Err(CliError::Input("no scenarios to run".into()));
    }
    Ok(specs)
}

pub fn run(args: &SimulateArgs) -> CliResult<SimulationOutput> {
    run_specs(scenarios(args)?, args)
}

fn run_specs(specs: Vec<ScenarioSpec>, args: &SimulateArgs) -> CliResult<SimulationOutput> {
    if args.folds < 2 {
        return Err(CliError::Input(format!("--folds must be at least 2, got {}", args.folds)));
    }
    let mut settings = SimSettings {
        folds: args.folds,
        parallel: !args.sequential,
        ..SimSettings::default()
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
        }
        settings.solver = settings.solver.with_tolerance(tol);
    }
    let mut out = SimulationOutput {
        regression: Vec::new(),
        matrix: Vec::new(),
    };
    for spec in specs {
        match spec {
            ScenarioSpec::Regression(sc) => {
                eprintln!("running {} ({} replications)", sc.name(), sc.replications);
                let rep = run_scenario(&sc, &settings)?;
                out.regression.push(if args.no_timing { rep.without_timing() } else { rep });
            }
            ScenarioSpec::Matrix(mut sc) => {
                eprintln!(
                    "running matrix {}x{} rank {} ({} replications)",
                    sc.rows, sc.cols, sc.rank, sc.replications
                );
                sc.parallel = !args.sequential;
                let mut rep = run_matrix_scenario(&sc)?;
                if args.no_timing {
                    for r in rep.records.iter_mut().flatten() {
                        r.elapsed_seconds = 0.0;
                    }
                }
                out.matrix.push(rep);
            }
        }
    }
    Ok(out)
}

fn write(w: &mut dyn Write, out: &SimulationOutput, format: Format) -> io::Result<()> {
    match format {
        Format::JsonLines => {
            write_report(&out.regression, format.into(), w)?;
            for rep in &out.matrix {
                for line in rep.lines() {
                    json_line(w, &line)?;
                }
            }
            Ok(())
        }
        Format::Csv => {
            if !out.regression.is_empty() {
                write_report(&out.regression, format.into(), w)?;
            }
            if !out.matrix.is_empty() {
                write_matrix_csv(&out.matrix, w)?;
            }
            Ok(())
        }
        Format::PrettyTable => {
            if !out.regression.is_empty() {
                write_report(&out.regression, format.into(), w)?;
            }
            if !out.matrix.is_empty() {
                if !out.regression.is_empty() {
                    writeln!(w)?;
                }
                w.write_all(pretty_matrix_table(&out.matrix).as_bytes())?;
            }
            Ok(())
        }
    }
}

pub fn execute(args: &SimulateArgs) -> CliResult<()> {
    let format = resolve_format(args.format, args.output.as_deref());
    let specs = scenarios(args)?;
    let has_matrix = specs.iter().any(|s| matches!(s, ScenarioSpec::Matrix(_)));
    let has_regression = specs.iter().any(|s| matches!(s, ScenarioSpec::Regression(_)));
    if format == Format::Csv && has_matrix && has_regression {
        // The two tables have different columns.
        return Err(CliError::Input(
            "csv output cannot mix regression and matrix scenarios; use json-lines or split the file".into(),
        ));
    }
    let out = run_specs(specs, args)?;
    emit(args.output.as_ref(), |w| write(w, &out, format))
}
