use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lapbound::error::{exit, AppError, Result};
use lapbound::experiment::WeightingMode;
use lapbound::{emit_report, io, run_experiment, ExperimentConfig, GraphSource};
use lapbound_core::bounds::{
    family_constants, light_edge_lower, ss_prime_lower, subset_flow_lower, BoundConstants, CongestionFamily,
    SsPrimeMode,
};
use lapbound_core::certify::{build_certificate, verify_certificate, CertifyOptions};
use lapbound_core::duality::{dual_min_congestion, primal_max_spread, SolverOptions, DEFAULT_TOL};
use lapbound_core::flow::{round_integral, validate_mu_flow};
use lapbound_core::graph::Family;
use lapbound_core::spectral::laplacian_spectrum;
use lapbound_core::{Error, Graph, VertexWeighting};
use serde_json::{json, Value};

/// Certified upper bounds on Laplacian eigenvalues.
#[derive(Parser)]
#[command(name = "lapbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph in the edge-list format.
    Gen {
        #[command(flatten)]
        graph: GraphArgs,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Laplacian spectrum as CSV.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spreading value, dual congestion and their gap.
    Spread {
        #[command(flatten)]
        graph: GraphArgs,
        /// Subset size.
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Congestion, intersection number, rounding and lower bounds of a flow.
    Flow {
        #[command(flatten)]
        graph: GraphArgs,
        /// Flow file: `mass v0 v1 ... vk` per path.
        #[arg(long)]
        flow: PathBuf,
        /// Subset distribution the flow should realize.
        #[arg(long)]
        subsets: Option<PathBuf>,
        /// Number of rounding seeds.
        #[arg(long, default_value_t = 0)]
        round: u64,
        /// Host class for the congestion measure: planar, genus:G or minor-free:H.
        #[arg(long, default_value = "planar")]
        class: String,
        /// Constants file (`key = value` lines).
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one certificate per k.
    Certify {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        range: KRange,
        /// Weighting file; the primal optimum is used when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Subset size for the weighting (default `⌊n/8k⌋`).
        #[arg(long)]
        r: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Partition seeds, comma separated.
        #[arg(long, value_parser = parse_seeds, default_value = "0,1,2,3,4,5,6,7")]
        seeds: Seeds,
        /// Only `Δ = ε/2`, precondition enforced, no truncation.
        #[arg(long)]
        strict: bool,
        /// Include the exact `λ_k` in each certificate.
        #[arg(long)]
        exact: bool,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate against its graph.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// Certificate JSON, single or array.
        #[arg(long)]
        certificate: PathBuf,
        /// Also compare with the exact `λ_k`.
        #[arg(long)]
        exact: bool,
    },
    /// Exact spectrum against certified bounds over a k range.
    Experiment {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        range: KRange,
        /// Subset size for the weighting (default `⌊n/8k⌋`).
        #[arg(long)]
        r: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Constants file (`key = value` lines).
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Partition seeds, comma separated.
        #[arg(long, value_parser = parse_seeds, default_value = "0,1,2,3,4,5,6,7")]
        seeds: Seeds,
        /// Certify the uniform weighting instead of the primal optimum.
        #[arg(long)]
        uniform: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with_all = ["family", "size"], required_unless_present = "family")]
    graph: Option<PathBuf>,
    /// path, cycle, grid, torus, star, complete or triangulated_disk.
    #[arg(long, requires = "size")]
    family: Option<String>,
    /// `N` or `W,H`.
    #[arg(long, value_delimiter = ',')]
    size: Vec<usize>,
    /// Generator seed (triangulated_disk only).
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl GraphArgs {
    fn source(&self) -> Result<GraphSource> {
        match (&self.graph, &self.family) {
            (Some(path), _) => Ok(GraphSource::File(path.clone())),
            (None, Some(name)) => {
                let family = Family::from_name(name).ok_or_else(|| {
                    let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
                    AppError::Usage(format!("unknown family {name:?}; expected one of {}", known.join(", ")))
                })?;
                Ok(GraphSource::Generated { family, size: self.size.clone(), seed: self.graph_seed })
            }
            (None, None) => Err(AppError::Usage("either --graph or --family is required".into())),
        }
    }

    fn load(&self) -> Result<Graph> {
        self.source()?.load()
    }
}

#[derive(Args)]
struct KRange {
    /// Smallest k.
    #[arg(long)]
    k_min: usize,
    /// Largest k, inclusive.
    #[arg(long)]
    k_max: usize,
}

#[derive(Args)]
struct SolverArgs {
    /// Relative tolerance of the solvers.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Iteration cap of the solvers.
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl SolverArgs {
    fn options(&self, default_cap: usize) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iterations: self.max_iterations.unwrap_or(default_cap),
            ..SolverOptions::default()
        }
    }
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> std::result::Result<Seeds, String> {
    let seeds = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad seed {t:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if seeds.is_empty() {
        return Err("seed list is empty".into());
    }
    Ok(Seeds(seeds))
}

fn parse_class(s: &str) -> Result<CongestionFamily> {
    let bad = || AppError::Usage(format!("unknown host class {s:?}; expected planar, genus:G or minor-free:H"));
    match s.split_once(':') {
        None if s == "planar" => Ok(CongestionFamily::Planar),
        Some(("genus", g)) => Ok(CongestionFamily::Genus(g.parse().map_err(|_| bad())?)),
        Some(("minor-free", h)) => Ok(CongestionFamily::MinorFree(h.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn constants(path: &Option<PathBuf>) -> Result<BoundConstants> {
    path.as_deref().map_or(Ok(BoundConstants::default()), io::read_constants)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> Result<()> {
    emit(out, &format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn check_k_range(range: &KRange, n: usize) -> Result<()> {
    if range.k_min == 0 || range.k_min > range.k_max || range.k_max > n {
        return Err(Error::InvalidParameter(format!("k range {}..={} must lie within [1, {n}]", range.k_min, range.k_max)).into());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { graph, out } => emit(&out, &io::format_graph(&graph.load()?)),
        Command::Spectrum { graph, out } => {
            let spectrum = laplacian_spectrum(&graph.load()?, false)?;
            emit(&out, &io::spectrum_csv(&spectrum)?)
        }
        Command::Spread { graph, r, solver, out } => {
            let g = graph.load()?;
            let (primal, primal_converged) = match primal_max_spread(&g, r, &solver.options(50_000)) {
                Ok(c) => (c, true),
                Err(e) => (e.best().ok_or_else(|| AppError::Usage("primal solver rejected the input".into()))?, false),
            };
            let (dual, dual_converged) = match dual_min_congestion(&g, r, &solver.options(50_000)) {
                Ok(d) => (d, true),
                Err(e) => (e.best().ok_or_else(|| AppError::Usage("dual solver rejected the input".into()))?, false),
            };
            let gap = (primal.epsilon - dual.dual_value).abs() / dual.dual_value.max(1e-12);
            emit_json(
                &out,
                &json!({
                    "r": r,
                    "epsilon": primal.epsilon,
                    "epsilon_mode": primal.mode,
                    "witness_set": primal.witness_set,
                    "weights": primal.weights.values(),
                    "primal_converged": primal_converged,
                    "dual_value": dual.dual_value,
                    "dual_lower_bound": dual.lower_bound,
                    "congestion": dual.con,
                    "dual_mode": dual.mode,
                    "dual_iterations": dual.iterations,
                    "dual_converged": dual_converged,
                    "gap": gap,
                }),
            )
        }
        Command::Flow { graph, flow, subsets, round, class, constants: cpath, out } => {
            let g = graph.load()?;
            let text = io::read_text(&flow)?;
            let f = io::parse_flow(&text, &flow, &g)?;
            let bc = constants(&cpath)?;
            let cc = family_constants(parse_class(&class)?, bc.c_kt)?;
            let mut report = json!({
                "paths": f.len(),
                "congestion": f.congestion(),
                "inter": f.intersection_number(),
                "integral": f.is_integral(),
                "constants": bc,
                "congestion_measure": cc,
            });
            if round > 0 {
                let values = (0..round)
                    .map(|seed| round_integral(&f, seed).map(|r| r.intersection_number()))
                    .collect::<lapbound_core::Result<Vec<f64>>>()?;
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                report["rounding"] = json!({ "seeds": round, "mean_inter": mean, "min_inter": min });
            }
            if let Some(spath) = subsets {
                let mu = io::parse_subsets(&io::read_text(&spath)?, &spath, Some(g.n()))?;
                let check = validate_mu_flow(&f, &mu);
                report["mu_flow"] = json!({ "valid": check.valid, "max_deviation": check.max_deviation });
                report["bounds"] = json!({
                    "subset_flow_lower": subset_flow_lower(&mu, g.n(), &cc, bc.c1, bc.c0),
                    "light_edge_lower": light_edge_lower(&mu, g.n(), &cc, bc.claim_lite_factor)?,
                    "ss_prime_formula": ss_prime_lower(&g, &mu, SsPrimeMode::Formula, &cc)?,
                });
            }
            emit_json(&out, &report)
        }
        Command::Certify { graph, range, weights, r, solver, seeds, strict, exact, out } => {
            let g = graph.load()?;
            let n = g.n();
            check_k_range(&range, n)?;
            let given = match &weights {
                Some(path) => Some(io::parse_weighting(&io::read_text(path)?, path, Some(n))?.normalized()?),
                None => None,
            };
            let spectrum = if exact { Some(laplacian_spectrum(&g, false)?) } else { None };
            let options = if strict { CertifyOptions::strict() } else { CertifyOptions::default() };
            let mut entries = Vec::new();
            for k in range.k_min..=range.k_max {
                let w = match &given {
                    Some(w) => w.clone(),
                    None => optimized_weights(&g, r.unwrap_or(n / (8 * k)), &solver),
                };
                let entry = match build_certificate(&g, &w, k, &seeds.0, &options) {
                    Ok(mut cert) => {
                        cert.exact_lambda_k = spectrum.as_ref().and_then(|s| s.lambda(k));
                        io::certificate_json(&cert)?
                    }
                    Err(failure) => json!({
                        "k": k,
                        "failure": failure.describe(),
                        "fallback_bound": failure.fallback_bound(),
                    }),
                };
                entries.push(entry);
            }
            emit_json(&out, &Value::Array(entries))
        }
        Command::Verify { graph, certificate, exact } => {
            let g = graph.load()?;
            let certs = io::parse_certificates(&io::read_text(&certificate)?)?;
            if certs.is_empty() {
                return Err(AppError::Usage(format!("{} holds no certificate", certificate.display())));
            }
            let spectrum = if exact { Some(laplacian_spectrum(&g, false)?) } else { None };
            let mut failed = Vec::new();
            for cert in &certs {
                let lambda = spectrum.as_ref().and_then(|s| s.lambda(cert.k));
                let report = verify_certificate(&g, cert, lambda);
                for c in &report.checks {
                    println!("k={} {} {}: {}", cert.k, if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
                }
                if report.passed() {
                    println!("k={} verified: lambda_{} <= {}", cert.k, cert.k, cert.certified_bound);
                } else {
                    failed.extend(report.failures().iter().map(|c| format!("k={} {}", cert.k, c.name)));
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(AppError::Check(failed.join(", ")))
            }
        }
        Command::Experiment { graph, range, r, solver, constants: cpath, seeds, uniform, threads, out } => {
            let mut config = ExperimentConfig::new(graph.source()?, range.k_min, range.k_max);
            config.r = r;
            config.tol = solver.tol;
            if let Some(cap) = solver.max_iterations {
                config.primal_iterations = cap;
            }
            config.constants = constants(&cpath)?;
            config.seeds = seeds.0;
            if uniform {
                config.weighting = WeightingMode::Uniform;
            }
            if let Some(t) = threads {
                config.threads = t;
            }
            let results = run_experiment(&config)?;
            for path in emit_report(&results, &out)? {
                println!("wrote {}", path.display());
            }
            let c = results.constants;
            println!("constants: C1={} c0={} c_KT={} claim_lite_factor={}", c.c1, c.c0, c.c_kt, c.claim_lite_factor);
            Ok(())
        }
    }
}

/// Primal optimum at `r`, or uniform weights when `r` is out of range.
fn optimized_weights(g: &Graph, r: usize, solver: &SolverArgs) -> VertexWeighting {
    if !(2..=g.n()).contains(&r) {
        return VertexWeighting::uniform(g.n());
    }
    match primal_max_spread(g, r, &solver.options(5_000)) {
        Ok(c) => c.weights,
        Err(e) => e.best().map_or_else(|| VertexWeighting::uniform(g.n()), |c| c.weights),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is reserved for resource guards
            return ExitCode::from(if e.use_stderr() { exit::VALIDATION } else { exit::SUCCESS } as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

