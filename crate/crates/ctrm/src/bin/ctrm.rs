//! Command-line front end: simulation, CDF tables, Laplace inversion,
//! convergence studies, and governing-equation checks.
//!
//! Every output embeds the exact resolved configuration as JSON in its
//! header, so any file can be regenerated byte-for-byte from itself.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
//! accuracy failure.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ctrm::govern::{
    mild_solution_check, residual_coupled_ctrm, residual_coupled_octrm, residual_uncoupled,
    FractionalGrid, GovernError,
};
use ctrm::laplace::{invert, InversionConfig};
use ctrm::limits::{
    limit_cdf, limit_transform, prelimit_laplace_ctrm, prelimit_laplace_octrm, LimitCdfRequest,
    LimitsError, Method,
};
use ctrm::model::{cl_exponent, ModelSpec};
use ctrm::experiment::{run_convergence, sample_rescaled_many};
use ctrm::Which;

const VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// configuration

/// Fully resolved run configuration; JSON-round-trippable and echoed into
/// every output header.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    /// "coupled" | "independent" | "exponential"
    model: String,
    beta: f64,
    /// gamma (coupled) or alpha (independent)
    shape: f64,
    /// exponential-model rate
    rate: f64,
    which: Which,
    /// time points
    t: Vec<f64>,
    /// x-grid specification
    x_min: f64,
    x_max: f64,
    x_count: usize,
    /// "lin" | "log"
    x_spacing: String,
    /// scales for convergence studies
    c: Vec<f64>,
    n_samples: usize,
    seed: u64,
    /// evaluation routes for `cdf`
    methods: Vec<Method>,
    /// Gaver-Stehfest order
    order: usize,
    /// coarsest GL step for `govern-check`
    h: f64,
    /// number of step halvings
    h_levels: usize,
    /// Laplace-domain check points
    xi: Vec<f64>,
    /// KS pass threshold for `converge`
    threshold: f64,
    workers: usize,
    /// "csv" | "json"
    format: String,
    out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "coupled".into(),
            beta: 0.5,
            shape: 1.0,
            rate: 1.0,
            which: Which::Ctrm,
            t: vec![1.0],
            x_min: 0.1,
            x_max: 10.0,
            x_count: 5,
            x_spacing: "log".into(),
            c: vec![100.0, 1000.0, 10000.0],
            n_samples: 100_000,
            seed: 20260824,
            methods: vec![Method::ClosedForm, Method::Inversion],
            order: 14,
            h: 4e-3,
            h_levels: 3,
            xi: vec![0.5, 1.0, 2.0],
            threshold: 0.05,
            workers: 0,
            format: "csv".into(),
            out: None,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(std::io::Error),
    Accuracy(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Accuracy(m) => write!(f, "numerical accuracy failure: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<LimitsError> for CliError {
    fn from(e: LimitsError) -> Self {
        match e {
            LimitsError::OrderDisagreement { .. } | LimitsError::NotAProbability(_) => {
                CliError::Accuracy(e.to_string())
            }
            LimitsError::Laplace(inner) => CliError::Accuracy(inner.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<GovernError> for CliError {
    fn from(e: GovernError) -> Self {
        match e {
            GovernError::Laplace(inner) => CliError::Accuracy(inner.to_string()),
            GovernError::Limits(inner) => CliError::from(inner),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Accuracy(_) => 4,
        }
    }
}

// ---------------------------------------------------------------------------
// argument parsing

/// Coupled continuous-time random maxima: simulation, limit CDFs,
/// Laplace inversion, convergence studies and governing-equation checks.
#[derive(Debug, Parser)]
#[command(name = "ctrm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SharedFlags {
    /// JSON config file; CLI flags override its fields
    #[arg(long)]
    config: Option<String>,
    /// model family: coupled | independent | exponential
    #[arg(long)]
    model: Option<String>,
    /// stable index in (0, 1)
    #[arg(long)]
    beta: Option<f64>,
    /// Frechet shape (gamma for coupled, alpha for independent)
    #[arg(long)]
    shape: Option<f64>,
    /// rate of the exponential oracle model
    #[arg(long)]
    rate: Option<f64>,
    /// process: ctrm | octrm
    #[arg(long)]
    which: Option<String>,
    /// time points (comma separated)
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// scales (comma separated)
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// number of Monte-Carlo samples
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads for sampling (0 = library default); CTRM_WORKERS env
    /// var supplies the default
    #[arg(long)]
    workers: Option<usize>,
    /// output file (default: stdout)
    #[arg(long)]
    out: Option<String>,
    /// output format: csv | json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw rescaled CTRM/OCTRM samples
    Simulate(SharedFlags),
    /// Tabulate limit CDFs over a (t, x) grid
    Cdf(SharedFlags),
    /// Invert the limit (or pre-limit) Laplace transform with an order check
    Invert(SharedFlags),
    /// Monte-Carlo convergence study toward the limit CDF
    Converge(SharedFlags),
    /// Governing-equation checks (Laplace-domain and GL residuals)
    GovernCheck(SharedFlags),
}

fn resolve_config(flags: &SharedFlags) -> Result<RunConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config file {path}: {e}")))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &flags.model {
        cfg.model = v.clone();
    }
    if let Some(v) = flags.beta {
        cfg.beta = v;
    }
    if let Some(v) = flags.shape {
        cfg.shape = v;
    }
    if let Some(v) = flags.rate {
        cfg.rate = v;
    }
    if let Some(v) = &flags.which {
        cfg.which = match v.as_str() {
            "ctrm" => Which::Ctrm,
            "octrm" => Which::Octrm,
            other => return Err(CliError::Config(format!("unknown process: {other}"))),
        };
    }
    if let Some(v) = &flags.t {
        cfg.t = v.clone();
    }
    if let Some(v) = &flags.c {
        cfg.c = v.clone();
    }
    if let Some(v) = flags.n_samples {
        cfg.n_samples = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.workers {
        cfg.workers = v;
    } else if cfg.workers == 0 {
        if let Ok(env) = std::env::var("CTRM_WORKERS") {
            cfg.workers = env
                .parse()
                .map_err(|_| CliError::Config(format!("bad CTRM_WORKERS value: {env}")))?;
        }
    }
    if let Some(v) = &flags.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = &flags.format {
        cfg.format = v.clone();
    }
    if cfg.format != "csv" && cfg.format != "json" {
        return Err(CliError::Config(format!("unknown format: {}", cfg.format)));
    }
    if cfg.x_count < 2 {
        return Err(CliError::Config("x_count must be at least 2".into()));
    }
    if cfg.t.iter().any(|&t| t <= 0.0) {
        return Err(CliError::Config("time points must be positive".into()));
    }
    Ok(cfg)
}

fn model_from(cfg: &RunConfig) -> Result<ModelSpec, CliError> {
    let m = match cfg.model.as_str() {
        "coupled" => ModelSpec::coupled(cfg.beta, cfg.shape),
        "independent" => ModelSpec::independent(cfg.beta, cfg.shape),
        "exponential" => ModelSpec::exponential(cfg.rate),
        other => return Err(CliError::Config(format!("unknown model: {other}"))),
    };
    m.map_err(|e| CliError::Config(e.to_string()))
}

fn x_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let (a, b, n) = (cfg.x_min, cfg.x_max, cfg.x_count);
    if !(a > 0.0 && b > a) {
        return Err(CliError::Config(format!("bad x grid: [{a}, {b}]")));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok(match cfg.x_spacing.as_str() {
        "lin" => (0..n).map(|i| a + (b - a) * step(i)).collect(),
        "log" => (0..n)
            .map(|i| (a.ln() + (b.ln() - a.ln()) * step(i)).exp())
            .collect(),
        other => return Err(CliError::Config(format!("unknown x_spacing: {other}"))),
    })
}

fn init_workers(cfg: &RunConfig) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cfg;
    Ok(())
}

// ---------------------------------------------------------------------------
// output

/// A finished table: named columns plus rows of f64 cells.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

fn write_output(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let config_json =
        serde_json::to_string(cfg).map_err(|e| CliError::Config(format!("config echo: {e}")))?;
    let mut buf = String::new();
    if cfg.format == "csv" {
        buf.push_str(&format!("# ctrm {VERSION}\n"));
        buf.push_str(&format!("# config {config_json}\n"));
        buf.push_str(&table.columns.join(","));
        buf.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            buf.push_str(&cells.join(","));
            buf.push('\n');
        }
    } else {
        let rows: Vec<serde_json::Value> = table
            .rows
            .iter()
            .map(|row| {
                table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            })
            .collect();
        let doc = serde_json::json!({
            "version": VERSION,
            "config": serde_json::from_str::<serde_json::Value>(&config_json).unwrap(),
            "data": rows,
        });
        buf = serde_json::to_string_pretty(&doc).unwrap();
        buf.push('\n');
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().write_all(buf.as_bytes())?,
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_simulate(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = model_from(cfg)?;
    let c = *cfg.c.first().ok_or_else(|| CliError::Config("need at least one scale c".into()))?;
    let t = cfg.t[0];
    let samples = sample_rescaled_many(&model, c, t, cfg.which, cfg.seed, cfg.n_samples)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Table {
        columns: vec!["value"],
        rows: samples.into_iter().map(|v| vec![v]).collect(),
    })
}

fn cmd_cdf(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = model_from(cfg)?;
    if cfg.methods.is_empty() {
        return Err(CliError::Config("need at least one method".into()));
    }
    let xs = x_grid(cfg)?;
    let mut columns = vec!["t", "x"];
    for m in &cfg.methods {
        columns.push(match m {
            Method::Inversion => "inversion",
            Method::ClosedForm => "closed_form",
            Method::Series => "series",
        });
    }
    let two = cfg.methods.len() == 2;
    if two {
        columns.push("abs_diff");
    }
    let mut rows = Vec::new();
    for &t in &cfg.t {
        for &x in &xs {
            let mut row = vec![t, x];
            for &method in &cfg.methods {
                let v = limit_cdf(&LimitCdfRequest {
                    model,
                    which: cfg.which,
                    method,
                    t,
                    x,
                })?;
                row.push(v);
            }
            if two {
                row.push((row[2] - row[3]).abs());
            }
            rows.push(row);
        }
    }
    Ok(Table { columns, rows })
}

fn cmd_invert(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = model_from(cfg)?;
    let xs = x_grid(cfg)?;
    let mut rows = Vec::new();
    for &t in &cfg.t {
        for &x in &xs {
            let (hi, lo) = match &model {
                ModelSpec::ExponentialIndependent { .. } => {
                    let tr = |xi: f64| match cfg.which {
                        Which::Ctrm => prelimit_laplace_ctrm(&model, xi, x).unwrap(),
                        Which::Octrm => prelimit_laplace_octrm(&model, xi, x).unwrap(),
                    };
                    let hi = invert(&tr, t, InversionConfig { order: cfg.order })
                        .map_err(|e| CliError::Accuracy(e.to_string()))?;
                    let lo = invert(&tr, t, InversionConfig { order: cfg.order.saturating_sub(2) })
                        .map_err(|e| CliError::Accuracy(e.to_string()))?;
                    (hi, lo)
                }
                _ => {
                    let exponent =
                        cl_exponent(&model).map_err(|e| CliError::Config(e.to_string()))?;
                    let tr = limit_transform(exponent, cfg.which, x);
                    let hi = invert(&tr, t, InversionConfig { order: cfg.order })
                        .map_err(|e| CliError::Accuracy(e.to_string()))?;
                    let lo = invert(&tr, t, InversionConfig { order: cfg.order.saturating_sub(2) })
                        .map_err(|e| CliError::Accuracy(e.to_string()))?;
                    (hi, lo)
                }
            };
            let diff = (hi - lo).abs();
            if diff > 1e-4 * hi.abs().max(1.0) {
                return Err(CliError::Accuracy(format!(
                    "order check failed at (t={t}, x={x}): {hi} vs {lo}"
                )));
            }
            rows.push(vec![t, x, hi, diff]);
        }
    }
    Ok(Table {
        columns: vec!["t", "x", "value", "order_check_diff"],
        rows,
    })
}

fn cmd_converge(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = model_from(cfg)?;
    let report = run_convergence(&model, cfg.which, cfg.t[0], &cfg.c, cfg.n_samples, cfg.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.c,
                r.n_samples as f64,
                r.ks,
                r.mc_se,
                f64::from(u8::from(r.ks < cfg.threshold)),
            ]
        })
        .collect();
    Ok(Table {
        columns: vec!["c", "n_samples", "ks", "mc_se", "pass"],
        rows,
    })
}

fn cmd_govern_check(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = model_from(cfg)?;
    let xs = x_grid(cfg)?;
    // rows: kind 0 = GL residual (x, h, max_residual, ratio-vs-previous),
    //       kind 1 = Laplace-domain (x, xi, lhs-rhs relative error, warning)
    let mut rows = Vec::new();
    for &x in &xs {
        let mut prev: Option<f64> = None;
        for level in 0..cfg.h_levels {
            let h = cfg.h / 2f64.powi(level as i32);
            // cover t in [h, 2] so residuals are comparable across levels
            let n = (2.0 / h).ceil() as usize;
            let grid = FractionalGrid::new(h, n).map_err(CliError::from)?;
            let res = match (&model, cfg.which) {
                (ModelSpec::IndependentStableFrechet { beta, alpha }, _) => {
                    residual_uncoupled(beta.get(), alpha.get(), grid, x)?
                }
                (ModelSpec::CoupledProductFrechet { beta, gamma }, Which::Ctrm) => {
                    residual_coupled_ctrm(beta.get(), gamma.get(), grid, x)?
                }
                (ModelSpec::CoupledProductFrechet { beta, gamma }, Which::Octrm) => {
                    residual_coupled_octrm(beta.get(), gamma.get(), grid, x)?
                }
                (ModelSpec::ExponentialIndependent { .. }, _) => {
                    return Err(CliError::Config(
                        "govern-check needs a limit-family model".into(),
                    ))
                }
            };
            let max_res = res
                .ts()
                .iter()
                .zip(res.vals())
                .filter(|(&t, _)| (0.5..=2.0).contains(&t))
                .map(|(_, &v)| v.abs())
                .fold(0.0, f64::max);
            let ratio = prev.map_or(f64::NAN, |p| max_res / p);
            prev = Some(max_res);
            rows.push(vec![0.0, x, h, max_res, ratio]);
        }
        for row in mild_solution_check(&model, cfg.which, x, &cfg.xi)? {
            rows.push(vec![1.0, x, row.xi, row.rel_err, f64::from(u8::from(row.accuracy_warning))]);
        }
    }
    Ok(Table {
        columns: vec!["kind", "x", "h_or_xi", "residual_or_rel_err", "ratio_or_warning"],
        rows,
    })
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let (flags, f): (&SharedFlags, fn(&RunConfig) -> Result<Table, CliError>) =
        match &cli.command {
            Command::Simulate(s) => (s, cmd_simulate),
            Command::Cdf(s) => (s, cmd_cdf),
            Command::Invert(s) => (s, cmd_invert),
            Command::Converge(s) => (s, cmd_converge),
            Command::GovernCheck(s) => (s, cmd_govern_check),
        };
    let cfg = resolve_config(flags)?;
    init_workers(&cfg)?;
    let table = f(&cfg)?;
    write_output(&cfg, &table)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
