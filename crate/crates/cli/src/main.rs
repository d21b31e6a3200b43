//! Command-line front end: configure a model, run propagation, expansion or
//! diagnostics, and emit CSV time series plus JSON reports for offline
//! plotting and regression fixtures.
//!
//! Output is byte-identical for identical configuration: no wall clock, no
//! randomness, shortest-roundtrip decimal formatting throughout.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use adiseries::diagnostics::{resum_comparison, validity_report};
use adiseries::expansion::{dual_dyson_expand, dyson_expand, SeriesPropagator};
use adiseries::models::{HamiltonianModel, ModelKind};
use adiseries::numerics::{CMat, TimeGrid};
use adiseries::oracle::{auto_oracle_kind, oracle_path, OracleKind};

use config::{fnv1a64, load_model};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "adiseries", version, about = "Dual perturbation series for driven few-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate with the chosen oracle and write the matrix entries as CSV.
    Propagate(RunArgs),
    /// Expand a perturbation series; one CSV per order plus a summary JSON.
    Expand(RunArgs),
    /// Run the validity analysis and write the diagnostics report as JSON.
    Diagnose(RunArgs),
    /// Compare truncation error before and after resummation (JSON).
    Resum(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesArg {
    Dyson,
    Dual,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Auto,
    Numeric,
}

#[derive(Args)]
struct RunArgs {
    /// Model descriptor file (key = value lines).
    #[arg(long)]
    model: PathBuf,
    /// Start of the time span.
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// End of the time span.
    #[arg(long)]
    t1: f64,
    /// Number of grid steps (>= 16).
    #[arg(long)]
    steps: usize,
    /// Maximum series order K (<= 4).
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Which series the expand command builds.
    #[arg(long, value_enum, default_value_t = SeriesArg::Dual)]
    series: SeriesArg,
    /// Oracle for propagation: closed form where available, or forced numeric.
    #[arg(long, value_enum, default_value_t = OracleArg::Auto)]
    oracle: OracleArg,
    /// Formal expansion parameter of the weak-coupling series.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Output path; sibling files derive from its stem.
    #[arg(long)]
    out: PathBuf,
}

struct Run {
    model: HamiltonianModel,
    grid: TimeGrid,
    order: usize,
    series: SeriesArg,
    oracle_kind: OracleKind,
    lambda: f64,
    out: PathBuf,
    config_hash: String,
}

enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

fn io_err(e: std::io::Error, path: &Path) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn prepare(cmd_name: &str, args: &RunArgs) -> Result<Run, CliError> {
    let parsed = load_model(&args.model).map_err(CliError::Config)?;
    if args.steps < 16 {
        return Err(CliError::Config(format!(
            "steps must be >= 16, got {}",
            args.steps
        )));
    }
    if args.order > 4 {
        return Err(CliError::Config(format!(
            "order must be <= 4, got {}",
            args.order
        )));
    }
    let grid = TimeGrid::new(args.t0, args.t1, args.steps)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let oracle_kind = match args.oracle {
        OracleArg::Auto => auto_oracle_kind(&parsed.model),
        OracleArg::Numeric => OracleKind::NumericMidpoint,
    };
    let series_name = match args.series {
        SeriesArg::Dyson => "dyson",
        SeriesArg::Dual => "dual",
    };
    let oracle_name = match args.oracle {
        OracleArg::Auto => "auto",
        OracleArg::Numeric => "numeric",
    };
    let canonical = format!(
        "cmd={cmd_name};model={};t0={};t1={};steps={};order={};series={series_name};oracle={oracle_name};lambda={}",
        parsed.canonical, args.t0, args.t1, args.steps, args.order, args.lambda,
    );
    Ok(Run {
        model: parsed.model,
        grid,
        order: args.order,
        series: args.series,
        oracle_kind,
        lambda: args.lambda,
        out: args.out.clone(),
        config_hash: format!("{:016x}", fnv1a64(&canonical)),
    })
}

fn entry_header(dim: usize) -> String {
    let mut header = String::from("t");
    for i in 0..dim {
        for j in 0..dim {
            header.push_str(&format!(",u{i}{j}_re,u{i}{j}_im"));
        }
    }
    header
}

/// CSV with a provenance comment, a header row, then one row per grid point:
/// t followed by Re/Im of every matrix entry in row-major order.
fn write_matrix_csv(
    path: &Path,
    hash: &str,
    grid: &TimeGrid,
    mats: &[CMat],
) -> Result<(), CliError> {
    let dim = mats[0].dim();
    let mut out = String::new();
    out.push_str(&format!("# config-hash: {hash}\n"));
    out.push_str(&entry_header(dim));
    out.push('\n');
    for (k, &t) in grid.points().iter().enumerate() {
        out.push_str(&format!("{t}"));
        for i in 0..dim {
            for j in 0..dim {
                let z = mats[k][(i, j)];
                out.push_str(&format!(",{},{}", z.re, z.im));
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(e, path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(e, path))
}

/// Sibling path derived from the output stem: `foo.csv` -> `foo.<tag>.<ext>`.
fn sibling(path: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = format!("{stem}.{tag}.{ext}");
    path.with_file_name(name)
}

fn cmd_propagate(run: &Run) -> Result<(), CliError> {
    let path = oracle_path(&run.model, &run.grid, run.oracle_kind)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    write_matrix_csv(&run.out, &run.config_hash, &run.grid, &path)
}

#[derive(Serialize)]
struct ExpandSummary {
    kind: String,
    lambda: f64,
    orders: usize,
    sup_norm_per_order: Vec<f64>,
}

fn cmd_expand(run: &Run) -> Result<(), CliError> {
    let series: SeriesPropagator = match run.series {
        SeriesArg::Dual => dual_dyson_expand(&run.model, &run.grid, run.order),
        SeriesArg::Dyson => dyson_expand(&run.model, &run.grid, run.order, run.lambda),
    }
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut sup_norms = Vec::with_capacity(run.order + 1);
    for j in 0..=run.order {
        let order_path = series.order_path(j).expect("order within range");
        write_matrix_csv(
            &sibling(&run.out, &format!("order{j}"), "csv"),
            &run.config_hash,
            &run.grid,
            order_path,
        )?;
        sup_norms.push(series.sup_abs_of_order(j).expect("order within range"));
    }
    let summary = ExpandSummary {
        kind: match run.series {
            SeriesArg::Dual => "dual".to_string(),
            SeriesArg::Dyson => "dyson".to_string(),
        },
        lambda: series.lambda,
        orders: run.order,
        sup_norm_per_order: sup_norms,
    };
    write_json(&sibling(&run.out, "summary", "json"), &summary)
}

#[derive(Serialize)]
struct DiagnoseOut {
    condition_lhs: Vec<(f64, f64)>,
    secular_slope: f64,
    slope_stderr: f64,
    verdict: String,
    recovered_parameter: Option<f64>,
    error_curve: Vec<(f64, f64)>,
    recovered_parameter_alt: Option<f64>,
    resummed_error_max: Option<f64>,
}

fn cmd_diagnose(run: &Run) -> Result<(), CliError> {
    let report = validity_report(&run.model, &run.grid, run.order)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let out = DiagnoseOut {
        condition_lhs: report.condition_lhs.clone(),
        secular_slope: report.secular_slope,
        slope_stderr: report.slope_stderr,
        verdict: report.verdict.as_str().to_string(),
        recovered_parameter: report.recovered_parameter,
        error_curve: report.error_curve.clone(),
        recovered_parameter_alt: report.recovered_parameter_alt,
        resummed_error_max: report.max_resummed_error(),
    };
    write_json(&run.out, &out)
}

#[derive(Serialize)]
struct ResumSlopes {
    before: f64,
    after: f64,
}

#[derive(Serialize)]
struct ResumOut {
    before: Vec<(f64, f64)>,
    after: Vec<(f64, f64)>,
    slopes: ResumSlopes,
}

fn cmd_resum(run: &Run) -> Result<(), CliError> {
    match run.model.kind {
        ModelKind::JaynesCummings(_) | ModelKind::DrivenTls(_) => {}
        _ => {
            return Err(CliError::Config(format!(
                "no resummation recipe for model kind `{}`",
                run.model.kind_name()
            )))
        }
    }
    let cmp = resum_comparison(&run.model, &run.grid, run.order, None)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let out = ResumOut {
        before: cmp.before,
        after: cmp.after,
        slopes: ResumSlopes {
            before: cmp.before_fit.slope,
            after: cmp.after_fit.slope,
        },
    };
    write_json(&run.out, &out)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Propagate(args) => cmd_propagate(&prepare("propagate", args)?),
        Command::Expand(args) => cmd_expand(&prepare("expand", args)?),
        Command::Diagnose(args) => cmd_diagnose(&prepare("diagnose", args)?),
        Command::Resum(args) => cmd_resum(&prepare("resum", args)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
