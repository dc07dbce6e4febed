//! Key-value scenario files.
//!
//! ```text
//! # comment
//! [scenario]
//! n = 100
//! p = 1000
//! sigma = 2
//! beta0 = 1:1, 2:1
//! replications = 50
//! seed = 17
//! label = row one
//! ```
//!
//! A file holds one or more blocks, each opened by a `[scenario]` line (the
//! header is optional for a single block). `seed` and `replications` may be
//! omitted and then come from the command line. A block with `kind = matrix`
//! describes a matrix denoising experiment with keys `rows`, `cols`, `rank`,
//! `sigma` and optionally `nuclear_norm`.

use std::collections::BTreeMap;

use tunefree_core::sim::{MatrixScenario, Scenario};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    Regression(Scenario),
    Matrix(MatrixScenario),
}

struct Block {
    start_line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

fn blocks(text: &str, origin: &str) -> CliResult<Vec<Block>> {
    let mut out: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.eq_ignore_ascii_case("[scenario]") {
            out.push(Block {
                start_line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("{origin}: line {line_no}: expected 'key = value'")))?;
        if out.is_empty() {
            out.push(Block {
                start_line: line_no,
                entries: BTreeMap::new(),
            });
        }
        let key = k.trim().to_ascii_lowercase();
        let block = out.last_mut().unwrap();
        if block.entries.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
            return Err(CliError::Input(format!("{origin}: line {line_no}: duplicate key '{key}'")));
        }
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{origin}: no scenarios found")));
    }
    Ok(out)
}

struct Fields<'a> {
    origin: &'a str,
    block: Block,
}

impl Fields<'_> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.block.entries.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| {
                CliError::Input(format!("{}: line {line}: cannot parse '{v}' for '{key}'", self.origin))
            }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<T> {
        self.parse(key)?.ok_or_else(|| {
            CliError::Input(format!(
                "{}: scenario starting at line {} is missing '{key}'",
                self.origin, self.block.start_line
            ))
        })
    }

    fn finish(self) -> CliResult<()> {
        match self.block.entries.into_iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(CliError::Input(format!("{}: line {line}: unknown key '{k}'", self.origin))),
        }
    }
}

fn parse_beta0(v: &str, line: usize, origin: &str) -> CliResult<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for item in v.split([',', ' ']).map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Input(format!("{origin}: line {line}: '{item}' is not an 'index:value' pair"));
        let (j, c) = item.split_once(':').ok_or_else(bad)?;
        out.push((j.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?));
    }
    Ok(out)
}

/// Parses every block. `default_seed` and `default_replications` fill
/// missing keys; a missing value with no default is an error.
pub fn parse_scenarios(
    text: &str,
    origin: &str,
    default_seed: u64,
    default_replications: Option<usize>,
) -> CliResult<Vec<ScenarioSpec>> {
    let mut out = Vec::new();
    for block in blocks(text, origin)? {
        let mut f = Fields { origin, block };
        let kind = f.take("kind").map(|(_, v)| v.to_ascii_lowercase());
        let replications = match f.parse("replications")? {
            Some(r) => r,
            None => default_replications.ok_or_else(|| {
                CliError::Input(format!(
                    "{origin}: scenario at line {} has no 'replications' and none was given on the command line",
                    f.block.start_line
                ))
            })?,
        };
        let seed = f.parse("seed")?.unwrap_or(default_seed);
        let label = f.take("label").map(|(_, v)| v);
        let sigma: f64 = f.require("sigma")?;
        let spec = match kind.as_deref() {
            None | Some("regression") => {
                let n = f.require("n")?;
                let p = f.require("p")?;
                let beta0 = match f.take("beta0") {
                    Some((line, v)) => parse_beta0(&v, line, origin)?,
                    None => Vec::new(),
                };
                let sc = Scenario {
                    n,
                    p,
                    sigma,
                    beta0,
                    replications,
                    base_seed: seed,
                    label,
                };
                sc.validate()
                    .map_err(|e| CliError::Input(format!("{origin}: scenario at line {}: {e}", f.block.start_line)))?;
                ScenarioSpec::Regression(sc)
            }
            Some("matrix") => {
                let mut sc = MatrixScenario::new(
                    f.require("rows")?,
                    f.require("cols")?,
                    f.require("rank")?,
                    sigma,
                    replications,
                    seed,
                );
                sc.nuclear_norm = f.parse("nuclear_norm")?;
                if let Some(k) = f.parse("moment_samples")? {
                    sc.moment_samples = k;
                }
                if replications == 0 {
                    return Err(CliError::Input(format!(
                        "{origin}: scenario at line {}: replications must be at least 1",
                        f.block.start_line
                    )));
                }
                ScenarioSpec::Matrix(sc)
            }
            Some(other) => {
                return Err(CliError::Input(format!(
                    "{origin}: scenario at line {}: unknown kind '{other}'",
                    f.block.start_line
                )))
            }
        };
        f.finish()?;
        out.push(spec);
    }
    Ok(out)
}
