//! Numeric CSV reading and writing.
//!
//! Comma separated, `.` decimal point, and an optional single header row,
//! detected by the first row containing a field that is not a number.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use tunefree_core::{DenseMatrix, DenseVector};

use crate::error::{CliError, CliResult};

/// Parsed numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub data: DenseMatrix,
}

fn parse_field(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Parses CSV text; `origin` names the source in error messages.
pub fn parse_table(text: &str, origin: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(idx as u64 + 1);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if idx == 0 && header.is_none() && rec.iter().any(|f| parse_field(f).is_none()) {
            header = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(CliError::Input(format!(
                    "{origin}: line {line} has {} fields, expected {w}",
                    rec.len()
                )))
            }
            _ => width = Some(rec.len()),
        }
        let mut row = Vec::with_capacity(rec.len());
        for (col, f) in rec.iter().enumerate() {
            row.push(parse_field(f).ok_or_else(|| {
                CliError::Input(format!(
                    "{origin}: line {line}, column {}: '{f}' is not a finite number",
                    col + 1
                ))
            })?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{origin}: no numeric rows")));
    }
    let cols = rows[0].len();
    let data = DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    Ok(Table { header, data })
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}

/// Reads a single-column file as a vector.
pub fn read_vector(path: &Path) -> CliResult<DenseVector> {
    let t = read_table(path)?;
    if t.data.ncols() != 1 {
        return Err(CliError::Input(format!(
            "{}: expected a single column, found {}",
            path.display(),
            t.data.ncols()
        )));
    }
    Ok(t.data.column(0).into_owned())
}

/// Writes a matrix with the shortest representation that parses back to the
/// same `f64`.
pub fn write_matrix(w: &mut dyn Write, m: &DenseMatrix, header: Option<&[String]>) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if let Some(h) = header {
        out.write_record(h)?;
    }
    for i in 0..m.nrows() {
        out.write_record((0..m.ncols()).map(|j| format!("{}", m[(i, j)])))?;
    }
    out.flush()
}
