//! `phasecrb`: bounds, scaling laws, the C surface, and tracking
//! simulations from JSON configuration documents.

// `!(x > 0.0)` guards reject NaN; `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use phasecrb_core::asymptotic;
use phasecrb_core::bound::{crb_mse, heisenberg_lower_bound, BoundResult};
use phasecrb_core::fisher::{validate_beam_spectrum, FisherSpectra, GridSpec};
use phasecrb_core::spectra::{BeamModel, PhaseNoiseModel};
use phasecrb_core::tracking::{monte_carlo_mse, tracked_trajectory};

use config::{
    parse, BoundConfig, OptimizeConfig, ScalingConfig, ScalingMode, SimulateConfig,
    SurfaceConfig, ValidateConfig,
};
use output::{fmt_f64, write_atomic, write_json, write_manifest, Manifest};

#[derive(Parser)]
#[command(name = "phasecrb", version, about = "Phase-estimation bound toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[clap(rename_all = "lower")]
enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Output path; a manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Output format (default: json, or csv for surface/scaling).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed override for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (fallback: the PHASECRB_THREADS environment variable).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also dump per-trajectory series (trajectory, t, phi, filtered,
    /// smoothed) as CSV to this path.
    #[arg(long)]
    dump_trajectories: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// MSE lower bound for a phase/beam pair.
    Bound(CommonArgs),
    /// Bound versus photon flux with a running scaling-exponent fit.
    Scaling(CommonArgs),
    /// C(gamma*, tau) over a grid.
    Surface(CommonArgs),
    /// Minimize C over the (gamma*, tau) box.
    Optimize(CommonArgs),
    /// Monte Carlo phase tracking.
    Simulate(SimulateArgs),
    /// Spectral physicality checks for a beam.
    Validate(CommonArgs),
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}");
            let field = extract_field(&message);
            let body = ErrorBody {
                error: message,
                field,
            };
            eprintln!("{}", serde_json::to_string(&body).unwrap());
            ExitCode::FAILURE
        }
    }
}

/// Pulls the first backtick-quoted name out of an error message, which is
/// where serde and the model constructors put the offending field.
fn extract_field(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let end = message[start..].find('`')? + start;
    Some(message[start..end].to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::Scaling(args) => cmd_scaling(args),
        Command::Surface(args) => cmd_surface(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn setup_threads(requested: Option<usize>) -> Result<Option<usize>> {
    let threads = match requested {
        Some(n) => Some(n),
        None => match std::env::var("PHASECRB_THREADS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .with_context(|| format!("PHASECRB_THREADS = `{v}` is not a thread count"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            bail!("`threads` must be nonzero");
        }
        // Ignore the error if a pool already exists (tests call run twice).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(threads)
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))
}

fn resolve_format(args: &CommonArgs, default: Format, supported: &[Format]) -> Result<Format> {
    let format = args.format.unwrap_or(default);
    if !supported.contains(&format) {
        bail!(
            "format `{}` not supported for this command",
            format.as_str()
        );
    }
    Ok(format)
}

#[derive(Serialize)]
struct BoundOutput {
    #[serde(flatten)]
    result: BoundResult,
    flux: f64,
}

fn cmd_bound(args: CommonArgs) -> Result<()> {
    let threads = setup_threads(args.threads)?;
    let format = resolve_format(&args, Format::Json, &[Format::Json])?;
    let cfg: BoundConfig = parse(&read_config(&args.config)?)?;
    let phase = cfg.phase.build()?;
    let beam = cfg.beam.build()?;
    let spectra = FisherSpectra::build(&phase, &beam)?;
    let result = crb_mse(&spectra.fc, &spectra.fq)?;
    write_json(
        &args.out,
        &BoundOutput {
            result,
            flux: spectra.flux,
        },
    )?;
    write_manifest(
        &args.out,
        &Manifest {
            command: "bound",
            config: &cfg,
            seed: args.seed,
            threads,
            format: format.as_str().into(),
            out: args.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}

fn running_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

fn cmd_scaling(args: CommonArgs) -> Result<()> {
    let threads = setup_threads(args.threads)?;
    let format = resolve_format(&args, Format::Csv, &[Format::Csv, Format::Json])?;
    let cfg: ScalingConfig = parse(&read_config(&args.config)?)?;
    if cfg.points < 2 || !(cfg.n_max > cfg.n_min) || !(cfg.n_min > 0.0) {
        bail!("`points` must be >= 2 and `n_min` < `n_max`, both positive");
    }
    let bound_at = |n: f64| -> Result<f64> {
        match cfg.mode {
            ScalingMode::Coherent => {
                let fc = PhaseNoiseModel::power_law(cfg.p, cfg.kappa)?
                    .classical_fisher_spectrum();
                let fq = phasecrb_core::spectra::Spectrum::constant(4.0 * n);
                Ok(crb_mse(&fc, &fq)?.value)
            }
            ScalingMode::Heisenberg => Ok(heisenberg_lower_bound(cfg.p, cfg.kappa, n)?.value),
        }
    };

    let ratio = (cfg.n_max / cfg.n_min).powf(1.0 / (cfg.points - 1) as f64);
    let mut rows = Vec::with_capacity(cfg.points);
    let mut log_points = Vec::new();
    for i in 0..cfg.points {
        let n = cfg.n_min * ratio.powi(i as i32);
        let b = bound_at(n)?;
        log_points.push((n.ln(), b.ln()));
        rows.push((n, b, running_slope(&log_points)));
    }

    match format {
        Format::Csv => {
            let mut body = String::from("n,bound,fit_slope_running\n");
            for (n, b, s) in &rows {
                body.push_str(&format!("{},{},{}\n", fmt_f64(*n), fmt_f64(*b), fmt_f64(*s)));
            }
            write_atomic(&args.out, body.as_bytes())?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                n: f64,
                bound: f64,
                fit_slope_running: f64,
            }
            let rows: Vec<Row> = rows
                .into_iter()
                .map(|(n, bound, fit_slope_running)| Row {
                    n,
                    bound,
                    fit_slope_running,
                })
                .collect();
            write_json(&args.out, &rows)?;
        }
        Format::Svg => unreachable!(),
    }
    write_manifest(
        &args.out,
        &Manifest {
            command: "scaling",
            config: &cfg,
            seed: args.seed,
            threads,
            format: format.as_str().into(),
            out: args.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}

fn cmd_surface(args: CommonArgs) -> Result<()> {
    let threads = setup_threads(args.threads)?;
    let format = resolve_format(&args, Format::Csv, &[Format::Csv, Format::Svg, Format::Json])?;
    let cfg: SurfaceConfig = parse(&read_config(&args.config)?)?;
    let gamma_grid = cfg.gamma_grid();
    let tau_grid = cfg.tau_grid();
    let cells = asymptotic::surface(&gamma_grid, &tau_grid)?;

    match format {
        Format::Csv => {
            let mut body = String::from("gamma_star,tau,c\n");
            for cell in &cells {
                let c = cell.c.map(fmt_f64).unwrap_or_default();
                body.push_str(&format!(
                    "{},{},{c}\n",
                    fmt_f64(cell.gamma_star),
                    fmt_f64(cell.tau)
                ));
            }
            write_atomic(&args.out, body.as_bytes())?;
        }
        Format::Svg => {
            let image = svg::heatmap(&cells, gamma_grid.len(), tau_grid.len());
            write_atomic(&args.out, image.as_bytes())?;
        }
        Format::Json => write_json(&args.out, &cells)?,
    }
    write_manifest(
        &args.out,
        &Manifest {
            command: "surface",
            config: &cfg,
            seed: args.seed,
            threads,
            format: format.as_str().into(),
            out: args.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}

fn cmd_optimize(args: CommonArgs) -> Result<()> {
    let threads = setup_threads(args.threads)?;
    let format = resolve_format(&args, Format::Json, &[Format::Json])?;
    let cfg: OptimizeConfig = parse(&read_config(&args.config)?)?;
    let outcome = asymptotic::optimize_c(
        (cfg.gamma_min, cfg.gamma_max),
        (cfg.tau_min, cfg.tau_max),
    )?;
    #[derive(Serialize)]
    struct OptimizeOutput {
        gamma_star: f64,
        tau: f64,
        #[serde(rename = "C0")]
        c0: f64,
        boundary_hit: bool,
    }
    write_json(
        &args.out,
        &OptimizeOutput {
            gamma_star: outcome.gamma_star,
            tau: outcome.tau,
            c0: outcome.c_min,
            boundary_hit: outcome.boundary_hit,
        },
    )?;
    write_manifest(
        &args.out,
        &Manifest {
            command: "optimize",
            config: &cfg,
            seed: args.seed,
            threads,
            format: format.as_str().into(),
            out: args.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let common = args.common;
    let threads = setup_threads(common.threads)?;
    let format = resolve_format(&common, Format::Json, &[Format::Json])?;
    let mut cfg: SimulateConfig = parse(&read_config(&common.config)?)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let tracking = cfg.build(common.seed)?;
    let result = monte_carlo_mse(&tracking)?;
    write_json(&common.out, &result)?;

    if let Some(dump_path) = &args.dump_trajectories {
        let mut body = String::from("trajectory,t,phi,phi_hat_filtered,phi_hat_smoothed\n");
        for trajectory in 0..cfg.trajectories as u64 {
            let tracked = tracked_trajectory(&tracking, trajectory);
            for k in 0..tracked.phi.len() {
                body.push_str(&format!(
                    "{trajectory},{},{},{},{}\n",
                    fmt_f64(k as f64 * tracked.dt),
                    fmt_f64(tracked.phi[k]),
                    fmt_f64(tracked.filtered[k]),
                    fmt_f64(tracked.smoothed[k]),
                ));
            }
        }
        write_atomic(dump_path, body.as_bytes())?;
    }

    write_manifest(
        &common.out,
        &Manifest {
            command: "simulate",
            config: &cfg,
            seed: Some(cfg.seed),
            threads,
            format: format.as_str().into(),
            out: common.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}

fn cmd_validate(args: CommonArgs) -> Result<()> {
    let threads = setup_threads(args.threads)?;
    let format = resolve_format(&args, Format::Json, &[Format::Json])?;
    let cfg: ValidateConfig = parse(&read_config(&args.config)?)?;
    let beam = cfg.beam.build()?;
    let general = match beam {
        BeamModel::General(g) => g,
        BeamModel::Opo(opo) => opo.to_general(),
        BeamModel::Coherent { alpha } => {
            // A coherent beam has vacuum quadrature statistics; give the
            // grid a unit reference width.
            phasecrb_core::spectra::OpoSqueezed::new(alpha, 1.0, 1.0, 1.0, 0.0)?.to_general()
        }
    };
    let report = validate_beam_spectrum(&general, &GridSpec::default())?;
    write_json(&args.out, &report)?;
    write_manifest(
        &args.out,
        &Manifest {
            command: "validate",
            config: &cfg,
            seed: args.seed,
            threads,
            format: format.as_str().into(),
            out: args.out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}
