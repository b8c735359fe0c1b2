//! Scaling experiment: exact spectrum against certified bounds, one row per
//! `k`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use lapbound_core::bounds::BoundConstants;
use lapbound_core::certify::{build_certificate, verify_certificate, CertifyFailure, CertifyOptions};
use lapbound_core::duality::{dual_min_congestion, primal_max_spread, SolveMode, SolverOptions, DEFAULT_TOL};
use lapbound_core::graph::{generate, Family};
use lapbound_core::spectral::laplacian_spectrum;
use lapbound_core::{Error, Graph, VertexWeighting};

use crate::error::{AppError, Result};
use crate::io;

/// Column order of `results.csv`.
pub const CSV_COLUMNS: [&str; 10] =
    ["family", "n", "k", "lambda_exact", "cert_bound", "epsilon", "beta", "dual_value", "gap", "flags"];

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Generated { family: Family, size: Vec<usize>, seed: u64 },
    File(PathBuf),
}

impl GraphSource {
    pub fn label(&self) -> String {
        match self {
            GraphSource::Generated { family, .. } => family.name().to_string(),
            GraphSource::File(path) => path.file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned()),
        }
    }

    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::Generated { family, size, seed } => Ok(generate(*family, size, *seed)?),
            GraphSource::File(path) => io::read_graph(path),
        }
    }
}

/// Where the weighting fed to the certificate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightingMode {
    /// Maximizer of `ε_r` from the primal solver.
    Optimized,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub k_min: usize,
    pub k_max: usize,
    /// Subset size for the solvers; `⌊n/8k⌋` when unset.
    pub r: Option<usize>,
    pub tol: f64,
    pub primal_iterations: usize,
    /// Frank–Wolfe rounds; the capped iterate is still a feasible flow.
    pub dual_iterations: usize,
    pub constants: BoundConstants,
    pub seeds: Vec<u64>,
    pub weighting: WeightingMode,
    /// Worker threads; rows are independent.
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSource, k_min: usize, k_max: usize) -> Self {
        Self {
            graph,
            k_min,
            k_max,
            r: None,
            tol: DEFAULT_TOL,
            primal_iterations: 5_000,
            dual_iterations: 500,
            constants: BoundConstants::default(),
            seeds: (0..8).collect(),
            weighting: WeightingMode::Optimized,
            threads: thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k_min == 0 || self.k_min > self.k_max || self.k_max > n {
            return Err(Error::InvalidParameter(format!(
                "k range {}..={} must lie within [1, {n}]",
                self.k_min, self.k_max
            ))
            .into());
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()).into());
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)).into());
        }
        if let Some(r) = self.r {
            if r < 2 || r > n {
                return Err(Error::InvalidParameter(format!("r = {r} outside [2, {n}]")).into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub d_max: usize,
    pub lambda_exact: f64,
    /// The certificate's bound, or `2·d_max` when no certificate was built.
    pub cert_bound: f64,
    pub certified: bool,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub dual_value: Option<f64>,
    pub gap: Option<f64>,
    pub flags: Vec<String>,
}

impl ResultRow {
    /// `λ_k·n/(d_max·k)`.
    pub fn normalized_lambda(&self) -> f64 {
        self.lambda_exact * self.n as f64 / (self.d_max as f64 * self.k as f64)
    }

    /// `bound·n/(d_max·k)`.
    pub fn normalized_bound(&self) -> f64 {
        self.cert_bound * self.n as f64 / (self.d_max as f64 * self.k as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub rows: Vec<ResultRow>,
    pub constants: BoundConstants,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    let graph = config.graph.load()?;
    let n = graph.n();
    config.validate(n)?;
    if graph.d_max() == 0 {
        return Err(Error::InvalidParameter("graph has no edges".into()).into());
    }
    let spectrum = laplacian_spectrum(&graph, false)?;
    let family = config.graph.label();
    let ks: Vec<usize> = (config.k_min..=config.k_max).collect();
    let workers = config.threads.clamp(1, ks.len());
    let mut rows: Vec<Option<ResultRow>> = vec![None; ks.len()];
    thread::scope(|scope| {
        let chunk = ks.len().div_ceil(workers);
        for (ks_part, out) in ks.chunks(chunk).zip(rows.chunks_mut(chunk)) {
            let (graph, family, spectrum) = (&graph, &family, &spectrum);
            scope.spawn(move || {
                for (&k, slot) in ks_part.iter().zip(out.iter_mut()) {
                    let lambda = spectrum.lambda(k).expect("k validated against n");
                    *slot = Some(row(graph, family, k, lambda, config));
                }
            });
        }
    });
    Ok(ExperimentResults { rows: rows.into_iter().map(|r| r.expect("every row computed")).collect(), constants: config.constants })
}

fn row(graph: &Graph, family: &str, k: usize, lambda_exact: f64, config: &ExperimentConfig) -> ResultRow {
    let n = graph.n();
    let mut flags = Vec::new();
    let r = config.r.unwrap_or(n / (8 * k));
    let mut epsilon = None;
    let mut dual_value = None;
    let mut weights = VertexWeighting::uniform(n);
    if (2..=n).contains(&r) {
        let primal_opts = SolverOptions { tol: config.tol, max_iterations: config.primal_iterations, ..SolverOptions::default() };
        let spread = match config.weighting {
            WeightingMode::Optimized => match primal_max_spread(graph, r, &primal_opts) {
                Ok(c) => Some(c),
                Err(e) => {
                    flags.push("primal_capped".to_string());
                    e.best()
                }
            },
            WeightingMode::Uniform => lapbound_core::duality::epsilon_r(graph, &weights, r).ok(),
        };
        match spread {
            Some(s) => {
                if s.mode == SolveMode::Heuristic {
                    flags.push("heuristic_spread".into());
                }
                epsilon = Some(s.epsilon);
                weights = s.weights;
            }
            None => flags.push("primal_error".into()),
        }
        let dual_opts = SolverOptions { tol: config.tol, max_iterations: config.dual_iterations, ..SolverOptions::default() };
        match dual_min_congestion(graph, r, &dual_opts) {
            Ok(d) => dual_value = Some(d.dual_value),
            Err(e) => match e.best() {
                Some(d) => {
                    flags.push("dual_capped".into());
                    dual_value = Some(d.dual_value);
                }
                None => flags.push("dual_error".into()),
            },
        }
    }
    let gap = match (epsilon, dual_value) {
        (Some(e), Some(d)) => Some((e - d).abs() / d.max(1e-12)),
        _ => None,
    };

    let (cert_bound, certified, beta) =
        match build_certificate(graph, &weights, k, &config.seeds, &CertifyOptions::default()) {
            Ok(cert) => {
                flags.extend(cert.flags.iter().map(|f| f.name().to_string()));
                let report = verify_certificate(graph, &cert, Some(lambda_exact));
                if !report.passed() {
                    for c in report.failures() {
                        flags.push(format!("failed_{}", c.name));
                    }
                }
                (cert.certified_bound, true, Some(cert.beta))
            }
            Err(failure) => {
                flags.push("fallback".into());
                flags.push(failure_kind(&failure).into());
                (failure.fallback_bound().unwrap_or(2.0 * graph.d_max() as f64), false, None)
            }
        };
    ResultRow {
        family: family.to_string(),
        n,
        k,
        d_max: graph.d_max(),
        lambda_exact,
        cert_bound,
        certified,
        epsilon,
        beta,
        dual_value,
        gap,
        flags,
    }
}

fn failure_kind(f: &CertifyFailure) -> &'static str {
    match f {
        CertifyFailure::Invalid(_) => "invalid",
        CertifyFailure::TooSmall { .. } => "too_small",
        CertifyFailure::PreconditionViolated { .. } => "precondition",
        CertifyFailure::MergeInfeasible { .. } => "merge_infeasible",
        CertifyFailure::NoCertificate { .. } => "no_certificate",
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// The table as CSV text with the fixed header.
pub fn results_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.lambda_exact.to_string(),
            r.cert_bound.to_string(),
            opt(r.epsilon),
            opt(r.beta),
            opt(r.dual_value),
            opt(r.gap),
            r.flags.join(";"),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"))
}

/// One parsed line of `results.csv`.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct CsvRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub lambda_exact: f64,
    pub cert_bound: f64,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub dual_value: Option<f64>,
    pub gap: Option<f64>,
    pub flags: String,
}

pub fn parse_results_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(AppError::Usage(format!("unexpected results header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(AppError::from)).collect()
}

/// Log–log scatter of `λ_k·n/(d_max·k)` (circles) and `bound·n/(d_max·k)`
/// (squares) against `k`. Points with a zero value are left out.
pub fn scaling_svg(rows: &[ResultRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let exact: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.normalized_lambda() > 0.0).map(|r| (r.k as f64, r.normalized_lambda())).collect();
    let bound: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.normalized_bound() > 0.0).map(|r| (r.k as f64, r.normalized_bound())).collect();
    let all = exact.iter().chain(&bound);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| M + (x.log10() - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M} {M} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    for e in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(e));
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" font-size="12" text-anchor="middle">1e{e}</text>"#, H - M + 18.0);
    }
    for e in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(e));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" font-size="12" text-anchor="end">1e{e}</text>"#, M - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">k</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">value·n/(d_max·k)</text>"#,
        H / 2.0,
        H / 2.0
    );
    for &(x, y) in &bound {
        let _ = writeln!(
            s,
            r##"<rect class="bound" x="{:.1}" y="{:.1}" width="7" height="7" fill="none" stroke="#c0392b"/>"##,
            px(x) - 3.5,
            py(y) - 3.5
        );
    }
    for &(x, y) in &exact {
        let _ = writeln!(s, r##"<circle class="exact" cx="{:.1}" cy="{:.1}" r="3.5" fill="#2c3e50"/>"##, px(x), py(y));
    }
    let _ = writeln!(s, r##"<circle cx="{:.1}" cy="24" r="3.5" fill="#2c3e50"/>"##, W - 200.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="28" font-size="12">λ_k (exact)</text>"#, W - 190.0);
    let _ = writeln!(s, r##"<rect x="{:.1}" y="36.5" width="7" height="7" fill="none" stroke="#c0392b"/>"##, W - 203.5);
    let _ = writeln!(s, r#"<text x="{:.1}" y="44" font-size="12">certified bound</text>"#, W - 190.0);
    s.push_str("</svg>\n");
    s
}

/// Writes `results.csv` and `scaling.svg` into `outdir`.
pub fn emit_report(results: &ExperimentResults, outdir: &Path) -> Result<Vec<PathBuf>> {
    if results.rows.is_empty() {
        return Err(Error::Validation("no result rows to report".into()).into());
    }
    fs::create_dir_all(outdir).map_err(|e| AppError::io(outdir, e))?;
    let csv_path = outdir.join("results.csv");
    io::write_text(&csv_path, &results_csv(&results.rows)?)?;
    let svg_path = outdir.join("scaling.svg");
    io::write_text(&svg_path, &scaling_svg(&results.rows))?;
    Ok(vec![csv_path, svg_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GraphSource {
        GraphSource::Generated { family: Family::Grid, size: vec![n], seed: 0 }
    }

    fn sample_row() -> ResultRow {
        ResultRow {
            family: "grid".into(),
            n: 4,
            k: 2,
            d_max: 2,
            lambda_exact: 2.0,
            cert_bound: 4.0,
            certified: false,
            epsilon: None,
            beta: None,
            dual_value: None,
            gap: None,
            flags: vec!["fallback".into(), "too_small".into()],
        }
    }

    #[test]
    fn grid8_first_eigenvalue_vanishes() {
        let mut c = ExperimentConfig::new(grid(8), 1, 1);
        c.dual_iterations = 50;
        let res = run_experiment(&c).unwrap();
        assert!(res.rows[0].lambda_exact.abs() < 1e-9);
        assert!(res.rows[0].cert_bound >= res.rows[0].lambda_exact);
    }

    #[test]
    fn invalid_k_range_is_rejected() {
        let c = ExperimentConfig::new(grid(3), 0, 2);
        assert!(matches!(run_experiment(&c), Err(AppError::Core(Error::InvalidParameter(_)))));
        let c = ExperimentConfig::new(grid(3), 2, 10);
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn empty_table_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ExperimentResults { rows: vec![], constants: BoundConstants::default() };
        assert!(matches!(emit_report(&empty, dir.path()), Err(AppError::Core(Error::Validation(_)))));
    }

    #[test]
    fn single_row_csv() {
        let text = results_csv(&[sample_row()]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        let parsed = parse_results_csv(&text).unwrap();
        assert_eq!(parsed[0].cert_bound, 4.0);
        assert_eq!(parsed[0].epsilon, None);
        assert_eq!(parsed[0].flags, "fallback;too_small");
    }

    #[test]
    fn svg_has_one_marker_per_positive_row() {
        let mut rows = vec![sample_row(), sample_row()];
        rows[1].k = 3;
        rows[0].lambda_exact = 0.0;
        let svg = scaling_svg(&rows);
        assert_eq!(svg.matches(r#"class="exact""#).count(), 1);
        assert_eq!(svg.matches(r#"class="bound""#).count(), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
    }
}
