use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tunefree_cli::commands::bounds::BoundsReport;
use tunefree_cli::commands::denoise::DenoiseReport;
use tunefree_cli::commands::regress::RegressReport;
use tunefree_cli::csvio::{parse_table, read_table};
use tunefree_core::sim::{parse_json_lines, ReportLine};
use tunefree_core::{DenseMatrix, GaussianSampler};

fn tunefree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunefree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = tunefree(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn matrix_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Small regression problem with a header and a constant column.
fn regression_files(dir: &TempDir) -> (PathBuf, PathBuf) {
    let (n, p) = (40, 12);
    let g = GaussianSampler::new(11, 0).matrix(n, p);
    let mut x = DenseMatrix::zeros(n, p);
    for i in 0..n {
        x[(i, 0)] = 1.0;
        for j in 1..p {
            // Columns on very different scales so standardization matters.
            x[(i, j)] = g[(i, j)] * (j as f64) + 0.5 * j as f64;
        }
    }
    let noise = GaussianSampler::new(11, 1).vector(n);
    let y: Vec<f64> = (0..n).map(|i| 2.0 * x[(i, 1)] - 1.0 * x[(i, 4)] + 0.5 * noise[i]).collect();
    let header: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let design = format!("{}\n{}", header.join(","), matrix_csv(&x));
    let response: String = y.iter().map(|v| format!("{v}\n")).collect();
    (write(dir, "x.csv", &design), write(dir, "y.csv", &response))
}

#[test]
fn regress_zero_response_gives_zero_fit() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.csv", "1,0\n0,1\n0,0\n");
    let y = write(&dir, "y.csv", "0\n0\n0\n");
    let out = ok_stdout(&["regress", "--design", s(&x), "--response", s(&y), "--seed", "1", "--format", "json-lines"]);
    let r: RegressReport = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(r.sigma_hat, 0.0);
    assert!(r.beta_hat.iter().all(|&b| b == 0.0));
    assert!(r.support.is_empty());
}

#[test]
fn regress_is_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let (x, y) = regression_files(&dir);
    let args = ["regress", "--design", s(&x), "--response", s(&y), "--seed", "7", "--format", "json-lines"];
    let a = ok_stdout(&args);
    let b = ok_stdout(&args);
    assert_eq!(a, b);
    let r: RegressReport = serde_json::from_str(a.trim()).unwrap();
    assert_eq!(r.seed, Some(7));
    assert_eq!(r.column_names.as_ref().unwrap()[4], "x4");
    assert!(r.support.contains(&1) && r.support.contains(&4));
}

/// Independent γ: centre and scale by hand, then take the largest column
/// norm over sqrt(n).
fn gamma_oracle(x: &DenseMatrix, standardize: bool) -> f64 {
    let n = x.nrows() as f64;
    let mut best = 0.0f64;
    for j in 0..x.ncols() {
        let col: Vec<f64> = x.column(j).iter().copied().collect();
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        let t: Vec<f64> = if standardize && sd > 0.0 {
            col.iter().map(|v| (v - mean) / sd).collect()
        } else {
            col
        };
        best = best.max(t.iter().map(|v| v * v).sum::<f64>().sqrt() / n.sqrt());
    }
    best
}

#[test]
fn regress_gamma_matches_column_norms_with_and_without_standardization() {
    let dir = TempDir::new().unwrap();
    let (x, y) = regression_files(&dir);
    let design = read_table(&x).unwrap().data;
    for (flag, std_on) in [("--standardize", true), ("--no-standardize", false)] {
        let out = ok_stdout(&["regress", "--design", s(&x), "--response", s(&y), "--seed", "3", flag, "--format", "json-lines"]);
        let r: RegressReport = serde_json::from_str(out.trim()).unwrap();
        let expect = gamma_oracle(&design, std_on);
        assert!((r.gamma - expect).abs() <= 1e-12 * expect, "{flag}: {} vs {expect}", r.gamma);
        assert_eq!(r.standardization.is_some(), std_on);
    }
}

#[test]
fn regress_back_transform_reproduces_fitted_mean() {
    let dir = TempDir::new().unwrap();
    let (x, y) = regression_files(&dir);
    let coef_path = dir.path().join("coef.csv");
    let out = ok_stdout(&[
        "regress", "--design", s(&x), "--response", s(&y), "--seed", "5", "--format", "json-lines", "--coefficients",
        s(&coef_path),
    ]);
    let r: RegressReport = serde_json::from_str(out.trim()).unwrap();
    let design = read_table(&x).unwrap().data;
    let st = r.standardization.as_ref().unwrap();
    for i in 0..design.nrows() {
        let original: f64 = (0..r.p).map(|j| design[(i, j)] * r.coefficients[j]).sum::<f64>() + r.offset;
        let scaled: f64 = (0..r.p).map(|j| (design[(i, j)] - st.means[j]) / st.scales[j] * r.beta_hat[j]).sum();
        assert!((original - scaled).abs() < 1e-9 * (1.0 + scaled.abs()));
    }
    let table = read_table(&coef_path).unwrap();
    assert_eq!(table.data.nrows(), r.p);
    assert_eq!(table.data[(4, 2)], r.coefficients[4]);
}

#[test]
fn regress_input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.csv", "1,2\n3,oops\n");
    let y = write(&dir, "y.csv", "1\n2\n");
    let out = tunefree(&["regress", "--design", s(&x), "--response", s(&y), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("column 2"), "{err}");

    let x = write(&dir, "x2.csv", "1,2\n3,4\n5,6\n");
    let out = tunefree(&["regress", "--design", s(&x), "--response", s(&y), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = tunefree(&["regress", "--design", s(&x), "--response", s(&y)]);
    assert_eq!(out.status.code(), Some(2), "seed is required");
}

#[test]
fn regress_csv_report_parses_back() {
    let dir = TempDir::new().unwrap();
    let (x, y) = regression_files(&dir);
    let out = ok_stdout(&["regress", "--design", s(&x), "--response", s(&y), "--seed", "2", "--format", "csv"]);
    let t = parse_table(&out, "stdout").unwrap();
    assert_eq!(t.header.unwrap(), vec!["index", "beta_hat", "coefficient", "selected"]);
    assert_eq!(t.data.nrows(), 12);
}

#[test]
fn denoise_zero_matrix() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "0,0,0\n0,0,0\n");
    let m_out = dir.path().join("m.csv");
    let out = ok_stdout(&["denoise", "--input", s(&input), "--seed", "4", "--format", "json-lines", "--matrix-output", s(&m_out)]);
    let r: DenoiseReport = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(r.sigma_hat, 0.0);
    assert!(r.m_hat.iter().all(|&v| v == 0.0));
    // Zero budget: the estimate is the input, byte for byte.
    assert_eq!(fs::read_to_string(&m_out).unwrap(), fs::read_to_string(&input).unwrap());
}

/// Soft-threshold level with `sum min(s_i, t)^2 = budget`, by bisection.
fn bisect_level(s: &[f64], budget: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, s.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if s.iter().map(|v| v.min(mid).powi(2)).sum::<f64>() < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn denoise_replayed_noise_unit_budget() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "3,0\n0,1\n");
    // |Z|_* = 8 makes sigma_hat = 4/8 and the budget 2 * 2 * 0.25 = 1.
    let noise = write(&dir, "z.csv", "4,0\n0,-4\n");
    let out = ok_stdout(&["denoise", "--input", s(&input), "--noise-file", s(&noise), "--format", "json-lines"]);
    let r: DenoiseReport = serde_json::from_str(out.trim()).unwrap();
    assert!((r.budget - 1.0).abs() < 1e-15);
    let level = bisect_level(&[3.0, 1.0], 1.0);
    let expect = [3.0 - level, 1.0 - level];
    for (got, want) in r.shrunk_singular_values.iter().zip(expect) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!((r.shrunk_singular_values[0] - 2.29289).abs() < 1e-5);
    assert!((r.shrunk_singular_values[1] - 0.29289).abs() < 1e-5);
    assert!((r.m_hat[(0, 0)] - expect[0]).abs() < 1e-9 && (r.m_hat[(1, 1)] - expect[1]).abs() < 1e-9);
}

#[test]
fn denoise_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let y = GaussianSampler::new(9, 0).matrix(6, 5) + GaussianSampler::new(9, 1).matrix(6, 1) * GaussianSampler::new(9, 2).matrix(1, 5) * 3.0;
    let input = write(&dir, "y.csv", &matrix_csv(&y));
    let json = ok_stdout(&["denoise", "--input", s(&input), "--seed", "12", "--format", "json-lines"]);
    let r: DenoiseReport = serde_json::from_str(json.trim()).unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), json.trim());
    let csv = ok_stdout(&["denoise", "--input", s(&input), "--seed", "12", "--format", "csv"]);
    let t = parse_table(&csv, "stdout").unwrap();
    assert_eq!(t.data, r.m_hat);
}

#[test]
fn denoise_shape_mismatch_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "y.csv", "1,2\n3,4\n");
    let noise = write(&dir, "z.csv", "1,2,3\n");
    let out = tunefree(&["denoise", "--input", s(&input), "--noise-file", s(&noise)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_zero_signal_and_rates() {
    let out = ok_stdout(&["bounds", "regression", "--n", "100", "--p", "1000", "--sigma", "2", "--beta-l1", "0", "--format", "json-lines"]);
    let r: BoundsReport = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(r.bound.r, Some(0.0));

    let out = ok_stdout(&[
        "bounds", "regression", "--n", "100", "--p", "1000", "--sigma", "2", "--beta-l1", "2", "--gamma", "1", "--format",
        "json-lines",
    ]);
    let r: BoundsReport = serde_json::from_str(out.trim()).unwrap();
    // |beta0|_1 gamma / sigma * sqrt(ln(p + n) / n)
    let oracle = 2.0 * 1.0 / 2.0 * (1100f64.ln() / 100.0).sqrt();
    assert!((r.bound.r.unwrap() - oracle).abs() < 1e-12);
    assert!((r.bound.r.unwrap() - 0.26459).abs() < 1e-4);

    let out = ok_stdout(&["bounds", "matrix", "--rows", "50", "--cols", "50", "--sigma", "1", "--nuclear-norm", "50", "--format", "csv"]);
    let t = parse_table(&out, "stdout").unwrap();
    let h = t.header.unwrap();
    assert_eq!(h[0], "s");
    // |M|_* (sqrt l + sqrt m) / (l m sigma)
    let oracle = 50.0 * (2.0 * 50f64.sqrt()) / 2500.0;
    assert!((t.data[(0, 0)] - oracle).abs() < 1e-12);
    assert!((t.data[(0, 0)] - 0.28284).abs() < 1e-5);
}

#[test]
fn bounds_nonpositive_sigma_exit_2() {
    for sigma in ["0", "-1"] {
        let out = tunefree(&["bounds", "regression", "--n", "10", "--p", "10", "--sigma", sigma, "--beta-l1", "1"]);
        assert_eq!(out.status.code(), Some(2), "sigma = {sigma}");
    }
}

#[test]
fn simulate_zero_replications_exit_2() {
    let out = tunefree(&["simulate", "--preset", "table1", "--replications", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tunefree(&["simulate", "--preset", "table1", "--rows", "9", "--replications", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_invalid_scenario_exit_2() {
    let dir = TempDir::new().unwrap();
    let sc = write(&dir, "bad.txt", "[scenario]\nn = 50\np = 20\nsigma = 1\nbeta0 = 30:1\n");
    let out = tunefree(&["simulate", "--scenario", s(&sc), "--seed", "1", "--replications", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let sc = write(&dir, "bad2.txt", "n = 50\np = 20\nsigma = 1\ncolour = red\n");
    let out = tunefree(&["simulate", "--scenario", s(&sc), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_preset_row5_single_replication() {
    let out = ok_stdout(&[
        "simulate", "--preset", "table1", "--replications", "1", "--rows", "5", "--seed", "42", "--format", "json-lines",
    ]);
    let lines = parse_json_lines(&out).unwrap();
    let mut methods = 0;
    for line in &lines {
        if let ReportLine::Summary { setting, summary, .. } = line {
            assert_eq!((setting.n, setting.p), (300, 300));
            assert!(summary.avg_true_positives <= 2.0);
            assert_eq!(summary.succeeded, 1);
            methods += 1;
        }
    }
    assert_eq!(methods, 2, "both methods are reported");
}

#[test]
fn simulate_row1_proposed_selects_fewer_false_positives() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("row1.jsonl");
    ok_stdout(&[
        "simulate", "--preset", "table1", "--replications", "20", "--rows", "1", "--seed", "2024", "--format", "json-lines",
        "--output", s(&path),
    ]);
    let lines = parse_json_lines(&fs::read_to_string(&path).unwrap()).unwrap();
    let fp = |method: &str| {
        lines
            .iter()
            .find_map(|l| match l {
                ReportLine::Summary { summary, .. } if summary.method.as_str() == method => Some(summary.avg_false_positives),
                _ => None,
            })
            .unwrap()
    };
    let (proposed, cv) = (fp("proposed"), fp("cv_lasso"));
    assert!(proposed < cv, "proposed FP {proposed} vs cv-lasso FP {cv}");
}

#[test]
fn simulate_scenario_file_matrix_and_regression() {
    let dir = TempDir::new().unwrap();
    let sc = write(
        &dir,
        "s.txt",
        "[scenario]\nn = 30\np = 20\nsigma = 1\nbeta0 = 1:2, 3:-1\nreplications = 2\n\n[scenario]\nkind = matrix\nrows = 8\ncols = 6\nrank = 1\nsigma = 1\nreplications = 2\n",
    );
    let args = ["simulate", "--scenario", s(&sc), "--seed", "8", "--no-timing", "--format", "json-lines"];
    let a = ok_stdout(&args);
    assert_eq!(a, ok_stdout(&args), "reruns with --no-timing are identical");
    let lines = parse_json_lines(&a).unwrap();
    assert!(lines.iter().any(|l| matches!(l, ReportLine::MatrixSummary { .. })));
    assert_eq!(lines.iter().filter(|l| matches!(l, ReportLine::Replication { .. })).count(), 4);
    let out = tunefree(&["simulate", "--scenario", s(&sc), "--seed", "8", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2), "csv cannot mix the two tables");
}

#[test]
fn simulate_csv_report_is_readable() {
    let dir = TempDir::new().unwrap();
    let sc = write(&dir, "s.txt", "n = 30\np = 20\nsigma = 1\nbeta0 = 1:2\n");
    let out = ok_stdout(&["simulate", "--scenario", s(&sc), "--seed", "8", "--replications", "2", "--format", "csv"]);
    let mut rdr = csv::ReaderBuilder::new().from_reader(out.as_bytes());
    let width = rdr.headers().unwrap().len();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().all(|r| r.len() == width));
    assert!(rows.len() >= 4);
}

#[test]
fn simulate_noiseless_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let sc = write(
        &dir,
        "s.txt",
        "[scenario]\nn = 30\np = 10\nsigma = 0\nbeta0 = 1:1\nreplications = 1\n\n[scenario]\nkind = matrix\nrows = 5\ncols = 4\nrank = 1\nsigma = 0\nreplications = 1\n",
    );
    let out = ok_stdout(&["simulate", "--scenario", s(&sc), "--seed", "3", "--format", "json-lines"]);
    let lines = parse_json_lines(&out).unwrap();
    assert_eq!(lines.len(), out.lines().count());
    let again: String = lines.iter().map(|l| serde_json::to_string(l).unwrap() + "\n").collect();
    assert_eq!(again, out);
}
