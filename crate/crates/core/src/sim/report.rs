//! Text serialisation of simulation reports.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::matrix::{MatrixReplication, MatrixReport, MatrixScenario};
use super::{Method, MethodOutcome, MethodSummary, ReplicationSeeds, Scenario, ScenarioReport};
use crate::estimators::RiskBound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    JsonLines,
    Csv,
    PrettyTable,
}

/// One line of the JSON-lines format: a replication of one method, or the
/// aggregate of one method over a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ReportLine {
    Replication {
        scenario: String,
        method: Method,
        replication: usize,
        seeds: ReplicationSeeds,
        #[serde(flatten)]
        outcome: Option<MethodOutcome>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    Summary {
        scenario: String,
        #[serde(flatten)]
        setting: ScenarioSetting,
        #[serde(flatten)]
        summary: MethodSummary,
    },
    MatrixReplication {
        #[serde(flatten)]
        outcome: Option<MatrixReplication>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    MatrixSummary {
        scenario: MatrixScenario,
        nuclear_norm: f64,
        #[serde(deserialize_with = "super::nan_if_null")]
        mean_normalized_risk: f64,
        #[serde(deserialize_with = "super::nan_if_null")]
        mean_naive_normalized_risk: f64,
        #[serde(deserialize_with = "super::nan_if_null")]
        mean_sigma_rel_error_sq: f64,
        bound: Option<RiskBound>,
        fitted_constant: Option<f64>,
        failed: usize,
    },
}

impl MatrixReport {
    /// One line per replication followed by the summary line.
    pub fn lines(&self) -> Vec<ReportLine> {
        let mut out: Vec<ReportLine> = self
            .records
            .iter()
            .map(|r| ReportLine::MatrixReplication {
                outcome: r.as_ref().ok().cloned(),
                error: r.as_ref().err().cloned(),
            })
            .collect();
        out.push(ReportLine::MatrixSummary {
            scenario: self.scenario.clone(),
            nuclear_norm: self.nuclear_norm,
            mean_normalized_risk: self.mean_normalized_risk,
            mean_naive_normalized_risk: self.mean_naive_normalized_risk,
            mean_sigma_rel_error_sq: self.mean_sigma_rel_error_sq,
            bound: self.bound.clone(),
            fitted_constant: self.fitted_constant,
            failed: self.failed,
        });
        out
    }
}

/// Human-readable table of matrix experiment averages.
pub fn pretty_matrix_table(reports: &[MatrixReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>5} {:>4} {:>6} {:>10} {:>9} {:>10} {:>12} {:>9} {:>5}",
        "rows", "cols", "rank", "sigma", "|M|_*", "risk", "naive", "(s/s0-1)^2", "fitted C", "fail"
    );
    for r in reports {
        let sc = &r.scenario;
        let _ = writeln!(
            out,
            "{:>5} {:>5} {:>4} {:>6} {:>10.3} {:>9.4} {:>10.4} {:>12.3e} {:>9} {:>5}",
            sc.rows,
            sc.cols,
            sc.rank,
            sc.sigma,
            r.nuclear_norm,
            r.mean_normalized_risk,
            r.mean_naive_normalized_risk,
            r.mean_sigma_rel_error_sq,
            r.fitted_constant.map(|c| format!("{c:.3}")).unwrap_or_else(|| "-".into()),
            r.failed
        );
    }
    out
}

/// CSV of matrix experiments: one row per replication and one summary row
/// per scenario.
pub fn write_matrix_csv(reports: &[MatrixReport], w: &mut dyn Write) -> io::Result<()> {
    writeln!(
        w,
        "record,rows,cols,rank,sigma,replication,normalized_risk,naive_normalized_risk,sigma_hat,sigma_rel_error_sq,fitted_constant,status"
    )?;
    for r in reports {
        let sc = &r.scenario;
        let head = format!("{},{},{},{}", sc.rows, sc.cols, sc.rank, sc.sigma);
        for rec in &r.records {
            match rec {
                Ok(x) => writeln!(
                    w,
                    "replication,{head},{},{},{},{},{},,ok",
                    x.replication, x.normalized_risk, x.naive_normalized_risk, x.sigma_hat, x.sigma_rel_error_sq
                )?,
                Err(e) => writeln!(w, "replication,{head},,,,,,,{}", csv_field(&format!("failed: {e}")))?,
            }
        }
        writeln!(
            w,
            "summary,{head},,{},{},,{},{},ok",
            r.mean_normalized_risk,
            r.mean_naive_normalized_risk,
            r.mean_sigma_rel_error_sq,
            r.fitted_constant.map(|c| c.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSetting {
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub replications: usize,
    pub base_seed: u64,
}

impl From<&Scenario> for ScenarioSetting {
    fn from(s: &Scenario) -> Self {
        Self {
            n: s.n,
            p: s.p,
            sigma: s.sigma,
            replications: s.replications,
            base_seed: s.base_seed,
        }
    }
}

impl ScenarioReport {
    /// Replication lines in index order, each method in turn, followed by
    /// the summary lines.
    pub fn lines(&self) -> Vec<ReportLine> {
        let name = self.scenario.name();
        let mut out = Vec::new();
        for rec in &self.records {
            for (method, res) in [(Method::Proposed, &rec.proposed), (Method::CvLasso, &rec.cv_lasso)] {
                let Some(res) = res else { continue };
                out.push(ReportLine::Replication {
                    scenario: name.clone(),
                    method,
                    replication: rec.replication,
                    seeds: rec.seeds,
                    outcome: res.as_ref().ok().cloned(),
                    error: res.as_ref().err().cloned(),
                });
            }
        }
        for s in [&self.proposed, &self.cv_lasso].into_iter().flatten() {
            out.push(ReportLine::Summary {
                scenario: name.clone(),
                setting: (&self.scenario).into(),
                summary: s.clone(),
            });
        }
        out
    }
}

/// Parses a JSON-lines report, skipping blank lines.
pub fn parse_json_lines(text: &str) -> Result<Vec<ReportLine>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

const CSV_HEADER: &str = "record,scenario,method,replication,n,p,sigma,true_positives,false_positives,\
prediction_error,prediction_error_normalized,elapsed_seconds,succeeded,failed,status";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_csv(reports: &[ScenarioReport], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for rep in reports {
        let sc = &rep.scenario;
        let name = csv_field(&sc.name());
        for line in rep.lines() {
            match line {
                ReportLine::Replication {
                    method,
                    replication,
                    outcome,
                    error,
                    ..
                } => match outcome {
                    Some(o) => writeln!(
                        w,
                        "replication,{name},{},{replication},{},{},{},{},{},{},{},{},,,ok",
                        method.as_str(),
                        sc.n,
                        sc.p,
                        sc.sigma,
                        o.true_positives,
                        o.false_positives,
                        o.prediction_error,
                        o.prediction_error_normalized,
                        o.elapsed_seconds
                    )?,
                    None => writeln!(
                        w,
                        "replication,{name},{},{replication},{},{},{},,,,,,,,{}",
                        method.as_str(),
                        sc.n,
                        sc.p,
                        sc.sigma,
                        csv_field(&format!("failed: {}", error.unwrap_or_default()))
                    )?,
                },
                ReportLine::Summary { summary: s, .. } => writeln!(
                    w,
                    "summary,{name},{},,{},{},{},{},{},{},{},{},{},{},ok",
                    s.method.as_str(),
                    sc.n,
                    sc.p,
                    sc.sigma,
                    s.avg_true_positives,
                    s.avg_false_positives,
                    s.avg_prediction_error,
                    s.avg_prediction_error_normalized,
                    s.elapsed_seconds,
                    s.succeeded,
                    s.failed
                )?,
                ReportLine::MatrixReplication { .. } | ReportLine::MatrixSummary { .. } => {}
            }
        }
    }
    Ok(())
}

/// Human-readable table of the scenario averages.
pub fn pretty_table(reports: &[ScenarioReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>5} {:>5}  {:<24} {:<9} {:>6} {:>7} {:>8} {:>9} {:>6} {:>9}",
        "n", "p", "sigma", "mean", "method", "TP", "FP", "PE", "PE/s^2", "fail", "seconds"
    );
    for rep in reports {
        let sc = &rep.scenario;
        let mut mean: Vec<String> = sc
            .beta0
            .iter()
            .map(|(j, v)| if *v == 1.0 { format!("x{j}") } else { format!("{v}*x{j}") })
            .collect();
        if mean.is_empty() {
            mean.push("0".into());
        }
        let mean = mean.join("+").replace("+-1*", "-").replace("+-", "-");
        for s in [&rep.proposed, &rep.cv_lasso].into_iter().flatten() {
            let _ = writeln!(
                out,
                "{:>5} {:>5} {:>5}  {:<24} {:<9} {:>6.2} {:>7.2} {:>8.3} {:>9.3} {:>6} {:>9.2}",
                sc.n,
                sc.p,
                sc.sigma,
                mean,
                s.method.as_str(),
                s.avg_true_positives,
                s.avg_false_positives,
                s.avg_prediction_error,
                s.avg_prediction_error_normalized,
                s.failed,
                s.elapsed_seconds
            );
        }
    }
    out
}

/// Writes `reports` to `w` in `format`.
pub fn write_report(reports: &[ScenarioReport], format: ReportFormat, w: &mut dyn Write) -> io::Result<()> {
    match format {
        ReportFormat::JsonLines => {
            for rep in reports {
                for line in rep.lines() {
                    serde_json::to_writer(&mut *w, &line)?;
                    writeln!(w)?;
                }
            }
            Ok(())
        }
        ReportFormat::Csv => write_csv(reports, w),
        ReportFormat::PrettyTable => w.write_all(pretty_table(reports).as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_scenario, SimSettings};

    fn report() -> ScenarioReport {
        let sc = Scenario {
            n: 30,
            p: 20,
            sigma: 1.0,
            beta0: vec![(1, 1.0), (3, -1.0)],
            replications: 2,
            base_seed: 5,
            label: Some("tiny, \"quoted\"".into()),
        };
        run_scenario(&sc, &SimSettings { folds: 3, grid_size: 20, ..Default::default() }).unwrap()
    }

    #[test]
    fn json_lines_round_trip() {
        let rep = report();
        let mut buf = Vec::new();
        write_report(std::slice::from_ref(&rep), ReportFormat::JsonLines, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = parse_json_lines(&text).unwrap();
        assert_eq!(parsed.len(), 2 * 2 + 2);
        assert_eq!(parsed, rep.lines());
    }

    #[test]
    fn csv_shape() {
        let rep = report();
        let mut buf = Vec::new();
        write_report(&[rep], ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cols = CSV_HEADER.split(',').count();
        assert_eq!(text.lines().count(), 1 + 6);
        assert!(text.lines().nth(1).unwrap().contains("\"tiny, \"\"quoted\"\"\""));
        // no quoted commas elsewhere, so a naive split after unquoting works
        for l in text.lines().skip(1) {
            let unq = l.replace("\"tiny, \"\"quoted\"\"\"", "x");
            assert_eq!(unq.split(',').count(), cols, "{l}");
        }
    }

    #[test]
    fn pretty_mentions_both_methods() {
        let t = pretty_table(&[report()]);
        assert!(t.contains("proposed") && t.contains("cv_lasso"));
        assert!(t.contains("x1-x3"), "{t}");
    }
}
