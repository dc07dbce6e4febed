//! Report format selection and the single output sink.

use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use tunefree_core::sim::ReportFormat;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    JsonLines,
    Csv,
    PrettyTable,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::JsonLines => ReportFormat::JsonLines,
            Format::Csv => ReportFormat::Csv,
            Format::PrettyTable => ReportFormat::PrettyTable,
        }
    }
}

/// Explicit choice wins; otherwise a terminal gets the pretty table and
/// everything else JSON lines.
pub fn resolve_format(requested: Option<Format>, output: Option<&Path>) -> Format {
    match requested {
        Some(f) => f,
        None if output.is_none() && io::stdout().is_terminal() => Format::PrettyTable,
        None => Format::JsonLines,
    }
}

/// Writes the whole report at once, to the output file or stdout.
pub fn emit(output: Option<&PathBuf>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// Writes a CSV file next to the main report (coefficients, denoised matrix).
pub fn write_file(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn json_line<T: serde::Serialize>(w: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)
}
