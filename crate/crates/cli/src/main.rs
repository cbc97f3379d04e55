//! Command-line front end: estimate Lipschitz matrices from CSV data and
//! drive the uncertainty, design, covering, and reduction pipelines,
//! emitting plot-ready CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 input error, 2 solver soft-failure with usable
//! output. Every command accepts --seed and is bit-reproducible for fixed
//! inputs and seed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use lipmat::complexity::{self, Metric};
use lipmat::design::{self, DesignMode};
use lipmat::geometry::{Domain, PointSet};
use lipmat::io::{self, format_float};
use lipmat::lipschitz::{self, LipschitzMatrix, SampleSet};
use lipmat::reduction;
use lipmat::solvers::{SdpOptions, SolveStatus};
use lipmat::testfns;
use lipmat::uncertainty::{self, MinimaxConfig};
use lipmat::SCHEMA_VERSION;

#[derive(Parser)]
#[command(
    name = "lipmat",
    version = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)"),
    about = "Lipschitz matrix estimation, uncertainty bounds, space-filling design, and covering analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the Lipschitz matrix from samples and/or gradients.
    Estimate(EstimateArgs),
    /// Pointwise uncertainty intervals at given points.
    Uncertainty(UncertaintyArgs),
    /// Set-valued bounds projected onto a one-dimensional shadow direction.
    Shadow(ShadowArgs),
    /// Sequential maximin space-filling design.
    Design(DesignArgs),
    /// Covering-number sweep over a log-spaced epsilon range.
    Cover(CoverArgs),
    /// Active-subspace extraction and shadow data.
    Reduce(ReduceArgs),
    /// List benchmark functions or emit sample/gradient CSVs for one.
    Bench(BenchArgs),
}

/// Flags shared by every subcommand. Values given on the command line
/// override the optional JSON config file; unknown config keys are rejected.
#[derive(Args, Clone)]
struct Common {
    /// Random seed for every stochastic component.
    #[arg(long)]
    seed: Option<u64>,
    /// Optional JSON config file supplying defaults for this command.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker cap; accepted for compatibility, results never depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn validate(&self) -> Result<()> {
        if let Some(t) = self.threads {
            if t == 0 {
                bail!("--threads must be >= 1");
            }
        }
        Ok(())
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Args)]
struct EstimateArgs {
    /// Samples CSV (columns x_1..x_m, f).
    samples: Option<PathBuf>,
    /// Gradients CSV (columns x_1..x_m, g_1..g_m).
    #[arg(long)]
    gradients: Option<PathBuf>,
    /// Noise level for the epsilon-Lipschitz variant (samples only).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Apply rank deflation to the estimate.
    #[arg(long)]
    deflate: bool,
    /// Relative eigenvalue tolerance for deflation.
    #[arg(long)]
    deflate_tol: Option<f64>,
    /// Output JSON path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    samples: Option<PathBuf>,
    gradients: Option<PathBuf>,
    epsilon: Option<f64>,
    deflate: Option<bool>,
    deflate_tol: Option<f64>,
    output: Option<PathBuf>,
    // accepted for interface uniformity; this command is deterministic
    #[allow(dead_code)]
    seed: Option<u64>,
}

fn cmd_estimate(args: EstimateArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: EstimateConfig = load_config(args.common.config.as_ref())?;
    let samples_path = args
        .samples
        .or(cfg.samples)
        .ok_or_else(|| anyhow!("a samples CSV is required"))?;
    let gradients = args.gradients.or(cfg.gradients);
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(0.0);
    let deflate = args.deflate || cfg.deflate.unwrap_or(false);
    let deflate_tol = args.deflate_tol.or(cfg.deflate_tol).unwrap_or(1e-8);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("lipschitz.json"));

    if epsilon > 0.0 && gradients.is_some() {
        bail!("--epsilon cannot be combined with a gradients file: the epsilon-Lipschitz class does not constrain derivatives");
    }

    let mut s = io::read_samples_csv(&samples_path)?;
    if let Some(gpath) = &gradients {
        let (gp, g) = io::read_gradients_csv(gpath)?;
        s = s.with_gradients(gp, g)?;
    }
    let mut lm = lipschitz::estimate(&s, epsilon, &SdpOptions::default())?;
    if deflate {
        lm = lipschitz::deflate_rank(&lm, &s, deflate_tol)?;
    }

    let status = lm.report().status;
    let mut payload = serde_json::to_value(&lm)?;
    payload["schema_version"] = json!(SCHEMA_VERSION);
    payload["rank"] = json!(lm.rank(1e-8));
    std::fs::write(&output, serde_json::to_string_pretty(&payload)?)?;

    Ok(match status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        _ => ExitCode::from(2),
    })
}

// ---------------------------------------------------------------------------
// uncertainty

#[derive(Args)]
struct UncertaintyArgs {
    /// Lipschitz matrix JSON from `estimate`.
    #[arg(long)]
    lipschitz: Option<PathBuf>,
    /// Samples CSV the bounds condition on.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Evaluation points CSV (columns x_1..x_m).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Output CSV path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct UncertaintyConfig {
    lipschitz: Option<PathBuf>,
    samples: Option<PathBuf>,
    points: Option<PathBuf>,
    output: Option<PathBuf>,
    // accepted for interface uniformity; this command is deterministic
    #[allow(dead_code)]
    seed: Option<u64>,
}

fn read_lipschitz(path: &Path) -> Result<LipschitzMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_domain(path: &Path) -> Result<Domain> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_uncertainty(args: UncertaintyArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: UncertaintyConfig = load_config(args.common.config.as_ref())?;
    let lm = read_lipschitz(
        &args
            .lipschitz
            .or(cfg.lipschitz)
            .ok_or_else(|| anyhow!("--lipschitz JSON is required"))?,
    )?;
    let s = io::read_samples_csv(
        &args
            .samples
            .or(cfg.samples)
            .ok_or_else(|| anyhow!("--samples CSV is required"))?,
    )?;
    let points = io::read_points_csv(
        &args
            .points
            .or(cfg.points)
            .ok_or_else(|| anyhow!("--points CSV is required"))?,
    )?;
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("uncertainty.csv"));

    let m = points.cols();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x_{i}")).collect();
    header.extend(["lower", "central", "upper", "gap"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut rows = Vec::with_capacity(points.rows());
    for i in 0..points.rows() {
        let x = points.row(i);
        let iv = uncertainty::interval_at(x, &s, &lm)?;
        let mut row = x.to_vec();
        row.push(iv.lower);
        row.push((iv.lower + iv.upper) / 2.0);
        row.push(iv.upper);
        row.push(iv.upper - iv.lower);
        rows.push(row);
    }
    io::write_csv(&output, &header_refs, &rows)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// shadow

#[derive(Args)]
struct ShadowArgs {
    #[arg(long)]
    lipschitz: Option<PathBuf>,
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Domain JSON; defaults to the normalized cube of the sample dimension.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Projection direction as comma-separated components (must be unit).
    #[arg(long)]
    direction: Option<String>,
    /// Number of alpha values swept across the projected range.
    #[arg(long)]
    alpha_count: Option<usize>,
    /// Output CSV path (alpha, lower, upper); a JSON sidecar with the
    /// direction and solver traces is written next to it.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ShadowConfig {
    lipschitz: Option<PathBuf>,
    samples: Option<PathBuf>,
    domain: Option<PathBuf>,
    direction: Option<String>,
    alpha_count: Option<usize>,
    output: Option<PathBuf>,
    seed: Option<u64>,
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad component '{t}': {e}"))
        })
        .collect()
}

fn cmd_shadow(args: ShadowArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: ShadowConfig = load_config(args.common.config.as_ref())?;
    let lm = read_lipschitz(
        &args
            .lipschitz
            .or(cfg.lipschitz)
            .ok_or_else(|| anyhow!("--lipschitz JSON is required"))?,
    )?;
    let s = io::read_samples_csv(
        &args
            .samples
            .or(cfg.samples)
            .ok_or_else(|| anyhow!("--samples CSV is required"))?,
    )?;
    let domain = match args.domain.or(cfg.domain) {
        Some(p) => read_domain(&p)?,
        None => Domain::normalized(s.dim()),
    };
    let u = match args.direction.or(cfg.direction) {
        Some(text) => parse_vector(&text)?,
        None if s.dim() == 1 => vec![1.0],
        None => bail!("--direction is required for dimension > 1"),
    };
    let alpha_count = args.alpha_count.or(cfg.alpha_count).unwrap_or(101);
    if alpha_count < 2 {
        bail!("--alpha-count must be >= 2");
    }
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("shadow.csv"));

    let (lo, hi) = domain.projection_range(&u)?;
    let alphas: Vec<f64> = (0..alpha_count)
        .map(|i| lo + (hi - lo) * i as f64 / (alpha_count - 1) as f64)
        .collect();
    let mcfg = MinimaxConfig::with_seed(seed);
    let entries = uncertainty::shadow_bounds(&u, &alphas, &domain, &s, &lm, &mcfg)?;

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for e in &entries {
        if let Some(iv) = &e.interval {
            rows.push(vec![e.alpha, iv.lower, iv.upper]);
            traces.push(json!({
                "alpha": e.alpha,
                "feasible": true,
                "arg_lower": iv.arg_lower,
                "arg_upper": iv.arg_upper,
            }));
        } else {
            traces.push(json!({"alpha": e.alpha, "feasible": false}));
        }
    }
    io::write_csv(&output, &["alpha", "lower", "upper"], &rows)?;
    let sidecar = output.with_extension("json");
    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "u": u,
        "seed": seed,
        "traces": traces,
    });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&payload)?)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// design

#[derive(Args)]
struct DesignArgs {
    /// Domain JSON; defaults to the normalized cube.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Metric JSON for fixed-metric mode.
    #[arg(long)]
    metric: Option<PathBuf>,
    /// Samples CSV to estimate the fixed metric from (alternative to --metric).
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Number of design points.
    #[arg(long)]
    count: Option<usize>,
    /// fixed or adaptive.
    #[arg(long)]
    mode: Option<String>,
    /// Benchmark function evaluated (normalized) in adaptive mode.
    #[arg(long)]
    function: Option<String>,
    /// Re-estimation stride in adaptive mode.
    #[arg(long)]
    stride: Option<usize>,
    /// Output CSV path; the fill trace lands in a JSON sidecar.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DesignConfig {
    domain: Option<PathBuf>,
    metric: Option<PathBuf>,
    samples: Option<PathBuf>,
    count: Option<usize>,
    mode: Option<String>,
    function: Option<String>,
    stride: Option<usize>,
    output: Option<PathBuf>,
    seed: Option<u64>,
}

fn cmd_design(args: DesignArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: DesignConfig = load_config(args.common.config.as_ref())?;
    let count = args
        .count
        .or(cfg.count)
        .ok_or_else(|| anyhow!("--count is required"))?;
    let mode = args.mode.or(cfg.mode).unwrap_or_else(|| "fixed".into());
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("design.csv"));
    let mcfg = MinimaxConfig::with_seed(seed);

    let design = match mode.as_str() {
        "fixed" | "fixed_metric" => {
            let lm = match (args.metric.or(cfg.metric), args.samples.or(cfg.samples)) {
                (Some(mpath), _) => read_lipschitz(&mpath)?,
                (None, Some(spath)) => {
                    let s = io::read_samples_csv(&spath)?;
                    lipschitz::estimate(&s, 0.0, &SdpOptions::default())?
                }
                (None, None) => bail!("fixed mode needs --metric JSON or --samples CSV"),
            };
            let domain = match args.domain.or(cfg.domain) {
                Some(p) => read_domain(&p)?,
                None => Domain::normalized(lm.dim()),
            };
            design::sequential_design(&domain, count, DesignMode::FixedMetric(&lm), &mcfg)?
        }
        "adaptive" => {
            let fname = args
                .function
                .or(cfg.function)
                .ok_or_else(|| anyhow!("adaptive mode needs --function"))?;
            let f = testfns::by_name(&fname)?;
            let domain = match args.domain.or(cfg.domain) {
                Some(p) => read_domain(&p)?,
                None => f.normalized_domain(),
            };
            let evaluator = |x: &[f64]| Some(f.evaluate_normalized(x));
            let stride = args.stride.or(cfg.stride).unwrap_or(1);
            design::sequential_design(
                &domain,
                count,
                DesignMode::Adaptive {
                    evaluator: &evaluator,
                    stride,
                },
                &mcfg,
            )?
        }
        other => bail!("unknown mode '{other}' (expected fixed or adaptive)"),
    };

    let m = design.points.dim();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x_{i}")).collect();
    if design.values.is_some() {
        header.push("f".into());
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<f64>> = (0..design.points.len())
        .map(|i| {
            let mut row = design.points.point(i).to_vec();
            if let Some(vals) = &design.values {
                row.push(vals[i]);
            }
            row
        })
        .collect();
    io::write_csv(&output, &header_refs, &rows)?;

    let sidecar = output.with_extension("json");
    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "mode": design.mode,
        "seed": seed,
        "fill_trace": design.fill_trace,
        "metric_trace": design.metric.trace(),
    });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&payload)?)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// cover

#[derive(Args)]
struct CoverArgs {
    /// Lipschitz matrix JSON (alternative: --scalar).
    #[arg(long)]
    lipschitz: Option<PathBuf>,
    /// Scalar Lipschitz constant acting as L I.
    #[arg(long)]
    scalar: Option<f64>,
    /// Domain JSON; defaults to the normalized cube of the metric dimension.
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    /// Number of log-spaced epsilon values.
    #[arg(long)]
    eps_count: Option<usize>,
    /// Grid size beyond which random cells estimate the count.
    #[arg(long)]
    subsample_threshold: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CoverConfig {
    lipschitz: Option<PathBuf>,
    scalar: Option<f64>,
    domain: Option<PathBuf>,
    eps_min: Option<f64>,
    eps_max: Option<f64>,
    eps_count: Option<usize>,
    subsample_threshold: Option<u64>,
    output: Option<PathBuf>,
    seed: Option<u64>,
}

fn cmd_cover(args: CoverArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: CoverConfig = load_config(args.common.config.as_ref())?;
    let lipschitz_path = args.lipschitz.or(cfg.lipschitz);
    let scalar = args.scalar.or(cfg.scalar);
    let lm_owned = match (&lipschitz_path, scalar) {
        (Some(p), None) => Some(read_lipschitz(p)?),
        (None, Some(_)) => None,
        _ => bail!("exactly one of --lipschitz or --scalar is required"),
    };
    let dim_hint = lm_owned.as_ref().map(|l| l.dim());
    let domain = match args.domain.or(cfg.domain) {
        Some(p) => read_domain(&p)?,
        None => Domain::normalized(
            dim_hint.ok_or_else(|| anyhow!("--domain is required with --scalar"))?,
        ),
    };
    let metric = match (&lm_owned, scalar) {
        (Some(lm), _) => Metric::Matrix(lm),
        (None, Some(s)) => Metric::Scalar(s),
        _ => unreachable!(),
    };
    let eps_min = args.eps_min.or(cfg.eps_min).unwrap_or(0.1);
    let eps_max = args.eps_max.or(cfg.eps_max).unwrap_or(2.0);
    let eps_count = args.eps_count.or(cfg.eps_count).unwrap_or(20);
    let threshold = args
        .subsample_threshold
        .or(cfg.subsample_threshold)
        .unwrap_or(100_000);
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("cover.csv"));
    if !(eps_min > 0.0 && eps_max > eps_min && eps_count >= 2) {
        bail!("need 0 < eps_min < eps_max and eps_count >= 2");
    }

    let mut curve = Vec::with_capacity(eps_count);
    let mut estimates = Vec::with_capacity(eps_count);
    for i in 0..eps_count {
        let t = i as f64 / (eps_count - 1) as f64;
        let eps = eps_min * (eps_max / eps_min).powf(t);
        let est = complexity::covering_upper_bound(metric, &domain, eps, threshold, seed)?;
        curve.push((est.epsilon, est.count));
        estimates.push(est);
    }
    let rates = complexity::growth_rate(&curve)?;
    // Slopes sit at pair midpoints; attach each sweep point's trailing slope
    // (the first row repeats the leading one).
    let mut rows = Vec::with_capacity(eps_count);
    for (i, est) in estimates.iter().enumerate() {
        let r = &rates[i.saturating_sub(1).min(rates.len() - 1)];
        rows.push(vec![
            est.epsilon,
            est.count,
            if est.exact { 1.0 } else { 0.0 },
            r.slope,
            r.smoothed,
        ]);
    }
    io::write_csv(
        &output,
        &["epsilon", "count", "exact", "slope", "smoothed_slope"],
        &rows,
    )?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// reduce

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    lipschitz: Option<PathBuf>,
    /// Subspace dimension.
    #[arg(short = 'n', long)]
    subspace_dim: Option<usize>,
    /// Samples CSV for the shadow scatter.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Gradients CSV for the average-outer-product comparison.
    #[arg(long)]
    gradients: Option<PathBuf>,
    /// Output JSON; the shadow CSV lands next to it.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ReduceConfig {
    lipschitz: Option<PathBuf>,
    subspace_dim: Option<usize>,
    samples: Option<PathBuf>,
    gradients: Option<PathBuf>,
    output: Option<PathBuf>,
    // accepted for interface uniformity; this command is deterministic
    #[allow(dead_code)]
    seed: Option<u64>,
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: ReduceConfig = load_config(args.common.config.as_ref())?;
    let lm = read_lipschitz(
        &args
            .lipschitz
            .or(cfg.lipschitz)
            .ok_or_else(|| anyhow!("--lipschitz JSON is required"))?,
    )?;
    let n = args.subspace_dim.or(cfg.subspace_dim).unwrap_or(1);
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("reduce.json"));

    let sub = reduction::active_subspace(lm.h(), n)?;

    let angles_vs_opg = match args.gradients.or(cfg.gradients) {
        Some(gpath) => {
            let (_, grads) = io::read_gradients_csv(&gpath)?;
            let c = reduction::avg_outer_product(&grads)?;
            let sub_opg = reduction::active_subspace(&c, n)?;
            Some(reduction::subspace_angle(&sub, &sub_opg)?)
        }
        None => None,
    };

    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "u": sub.u,
        "eigenvalues": sub.eigenvalues,
        "angles_vs_opg": angles_vs_opg,
    });
    std::fs::write(&output, serde_json::to_string_pretty(&payload)?)?;

    if let Some(spath) = args.samples.or(cfg.samples) {
        let s = io::read_samples_csv(&spath)?;
        let u0 = sub.column(0);
        let norm = lipmat::linalg::norm2(&u0);
        let unit: Vec<f64> = u0.iter().map(|v| v / norm).collect();
        let rows: Vec<Vec<f64>> = reduction::shadow_data(&unit, &s)?
            .into_iter()
            .map(|(p, v)| vec![p, v])
            .collect();
        io::write_csv(&output.with_extension("csv"), &["projection", "f"], &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// bench

#[derive(Args)]
struct BenchArgs {
    /// Benchmark function name; omit to list the catalog.
    #[arg(long)]
    function: Option<String>,
    /// Number of points to draw.
    #[arg(long)]
    count: Option<usize>,
    /// Write samples CSV here.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Write gradients CSV here.
    #[arg(long)]
    gradients: Option<PathBuf>,
    /// Emit data on the normalized domain with normalized outputs.
    #[arg(long)]
    normalized: bool,
    /// Include the 2^m corners before random points.
    #[arg(long)]
    include_corners: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    function: Option<String>,
    count: Option<usize>,
    samples: Option<PathBuf>,
    gradients: Option<PathBuf>,
    normalized: Option<bool>,
    include_corners: Option<bool>,
    seed: Option<u64>,
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    args.common.validate()?;
    let cfg: BenchConfig = load_config(args.common.config.as_ref())?;
    let Some(fname) = args.function.or(cfg.function) else {
        println!("name,dim,out_lo,out_hi");
        for f in testfns::catalog() {
            let (lo, hi) = f.output_range();
            println!(
                "{},{},{},{}",
                f.name(),
                f.dim(),
                format_float(lo),
                format_float(hi)
            );
        }
        return Ok(ExitCode::SUCCESS);
    };
    let f = testfns::by_name(&fname)?;
    let count = args.count.or(cfg.count).unwrap_or(100);
    let normalized = args.normalized || cfg.normalized.unwrap_or(false);
    let include_corners = args.include_corners || cfg.include_corners.unwrap_or(false);
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);

    let domain = if normalized {
        f.normalized_domain()
    } else {
        f.native_domain()
    };
    let mut pts = PointSet::new(f.dim());
    if include_corners {
        for c in domain.corners()?.iter() {
            pts.push(c);
        }
    }
    let remaining = count.saturating_sub(pts.len());
    for p in domain.sample_uniform(remaining, seed)?.iter() {
        pts.push(p);
    }

    if let Some(spath) = args.samples.or(cfg.samples) {
        let values = f.evaluate_batch(&pts, normalized, true)?;
        let mut s = SampleSet::empty(f.dim());
        for (i, p) in pts.iter().enumerate() {
            s.push_sample(p, values[i]);
        }
        io::write_samples_csv(&spath, &s)?;
    }
    if let Some(gpath) = args.gradients.or(cfg.gradients) {
        let grads = f.gradient_batch(&pts, normalized, true)?;
        io::write_gradients_csv(&gpath, pts.matrix(), &grads)?;
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Uncertainty(a) => cmd_uncertainty(a),
        Command::Shadow(a) => cmd_shadow(a),
        Command::Design(a) => cmd_design(a),
        Command::Cover(a) => cmd_cover(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
