//! Command implementations behind the `onewave` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{
    q_metric, read_section, write_section, write_seismogram_csv, AnalysisError, QCurve, Section, Seismogram,
};
use crate::bremmer::{OneWayOptions, OneWayResult, OneWaySolver, SolverError};
use crate::config::{format_layers, parse_layers, Config, ConfigError};
use crate::fullwave::{FdError, FdSolver};
use crate::model::ModelError;

pub const WORKERS_ENV: &str = "ONEWAVE_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("io failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) => 4,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<FdError> for CliError {
    fn from(e: FdError) -> Self {
        match e {
            FdError::OffGrid(_) | FdError::Param(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Mismatch(_) => CliError::Usage(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(ConfigError::Model(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "onewave", version, about = "One-way and full-wave acoustic modeling in layered media")]
pub struct Cli {
    /// Worker threads for frequency-parallel work (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-way modeling of the configured shot.
    Oneway(OnewayArgs),
    /// Finite-difference reference seismogram.
    Fullwave(FullwaveArgs),
    /// Amplitude ratio Q(x) of a full-wave and a one-way seismogram.
    Qcurve(QcurveArgs),
    /// Q(x) for a list of lower-layer speeds.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OnewayArgs {
    pub config: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub epsilon: Option<u8>,
    /// Keep reflection coupling but drop the transmission operator.
    #[arg(long)]
    pub no_transmission: bool,
    #[arg(long)]
    pub multiples: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write pressure snapshots at these times (seconds).
    #[arg(long, value_delimiter = ',')]
    pub snapshot: Vec<f64>,
    /// Also write CSV copies of the seismograms.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct FullwaveArgs {
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct QcurveArgs {
    /// Full-wave seismogram section.
    pub full: PathBuf,
    /// One-way seismogram section.
    pub oneway: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// Lower-layer speeds, m/s.
    #[arg(long, value_delimiter = ',', required = true)]
    pub contrasts: Vec<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub epsilon: u8,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Tolerance on |Q - 1| defining the neighborhood of the shot.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Radius around the shot for the near-shot minimum, meters.
    #[arg(long, default_value_t = 100.0)]
    pub near: f64,
}

/// First 12 hex digits of the SHA-256 of `text`.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn run_dir(out: &Path, hash: &str) -> Result<PathBuf, CliError> {
    let dir = out.join(format!("run-{}", &hash[..12]));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_manifest(dir: &Path, value: serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// Applies command-line overrides to a loaded configuration.
pub fn apply_oneway_flags(cfg: &mut Config, args: &OnewayArgs) {
    if let Some(e) = args.epsilon {
        cfg.run.epsilon = e;
    }
    if args.no_transmission {
        cfg.run.transmission = false;
    }
    if let Some(n) = args.multiples {
        cfg.run.multiples = n;
    }
}

pub fn cmd_oneway(args: &OnewayArgs) -> Result<PathBuf, CliError> {
    let mut cfg = Config::from_path(&args.config)?;
    apply_oneway_flags(&mut cfg, args);
    let plan = cfg.plan()?;
    let canonical = format!("oneway\n{}\nsnapshots={:?}", cfg.to_toml(), args.snapshot);
    let hash = config_hash(&canonical);
    let dir = run_dir(&args.out, &hash)?;
    info!("one-way run into {}", dir.display());
    let solver = OneWaySolver::with_options(
        plan.clone(),
        OneWayOptions {
            snapshot_times: args.snapshot.clone(),
        },
    );
    let result = solver.run()?;
    let files = write_oneway_outputs(&dir, &result, plan.shot.source_x, plan.grid.nx, args.csv)?;
    write_manifest(
        &dir,
        json!({
            "command": "oneway",
            "config_hash": hash,
            "config": cfg.to_toml(),
            "epsilon": plan.run.epsilon.index(),
            "transmission": plan.run.include_transmission,
            "multiples": (0..=plan.run.multiples).collect::<Vec<_>>(),
            "frequency_bins": [result.window.first, result.window.last],
            "files": files,
        }),
    )?;
    Ok(dir)
}

fn write_oneway_outputs(
    dir: &Path,
    result: &OneWayResult,
    source_x: f64,
    nx: usize,
    csv: bool,
) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    let mut put = |name: String, section: Section| -> Result<(), CliError> {
        write_section(&dir.join(&name), &section)?;
        files.push(name);
        Ok(())
    };
    put("seismogram.owf".into(), result.total.to_section(source_x))?;
    for (m, s) in result.multiples.iter().enumerate() {
        put(format!("multiple_{m}.owf"), s.to_section(source_x))?;
    }
    let g = &result.total;
    let d_omega = 2.0 * std::f64::consts::PI / (g.nt as f64 * g.dt);
    for (m, spectrum) in result.spectra.iter().enumerate() {
        let rows = result.window.len();
        put(
            format!("multiple_{m}_spectrum.owf"),
            Section::from_complex(rows, nx, d_omega, g.dx, g.receiver_depth, spectrum),
        )?;
    }
    for (i, snap) in result.snapshots.iter().enumerate() {
        put(format!("snapshot_{i}.owf"), snap.to_section())?;
    }
    if csv {
        write_seismogram_csv(&dir.join("seismogram.csv"), &result.total)?;
        files.push("seismogram.csv".into());
    }
    Ok(files)
}

pub fn cmd_fullwave(args: &FullwaveArgs) -> Result<PathBuf, CliError> {
    let mut cfg = Config::from_path(&args.config)?;
    if let Some(r) = args.refine {
        cfg.fullwave.refine = r;
    }
    let plan = cfg.plan()?;
    let hash = config_hash(&format!("fullwave\n{}", cfg.to_toml()));
    let dir = run_dir(&args.out, &hash)?;
    let solver = FdSolver::new(plan.clone(), cfg.fullwave)?;
    info!(
        "full-wave run into {} (dt = {} s, {} steps per sample)",
        dir.display(),
        solver.dt(),
        solver.substeps()
    );
    let seis = solver.run()?;
    write_section(&dir.join("seismogram.owf"), &seis.to_section(plan.shot.source_x))?;
    let mut files = vec!["seismogram.owf".to_string()];
    if args.csv {
        write_seismogram_csv(&dir.join("seismogram.csv"), &seis)?;
        files.push("seismogram.csv".into());
    }
    write_manifest(
        &dir,
        json!({
            "command": "fullwave",
            "config_hash": hash,
            "config": cfg.to_toml(),
            "fd_dt": solver.dt(),
            "fd_substeps": solver.substeps(),
            "fd_shape": solver.shape(),
            "files": files,
        }),
    )?;
    Ok(dir)
}

pub fn cmd_qcurve(args: &QcurveArgs) -> Result<QCurve, CliError> {
    let full_section = read_section(&args.full)?;
    let shot_x = full_section.origin;
    let full = Seismogram::from_section(full_section)?;
    let oneway_section = read_section(&args.oneway)?;
    if (oneway_section.origin - shot_x).abs() > 1e-9 * shot_x.abs().max(1.0) {
        return Err(CliError::Usage(format!(
            "source positions differ: {} and {}",
            shot_x, oneway_section.origin
        )));
    }
    let oneway = Seismogram::from_section(oneway_section)?;
    let q = q_metric(&full, &oneway, shot_x)?;
    q.write_csv(&args.out)?;
    Ok(q)
}

/// One row of the contrast-sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lower_speed: f64,
    pub near_shot_error: Option<f64>,
    pub half_width: f64,
    pub q: QCurve,
}

/// Runs the one-way and full-wave solvers for each lower-layer speed.
pub fn contrast_sweep(
    base: &Config,
    contrasts: &[f64],
    epsilon: u8,
    tolerance: f64,
    near: f64,
) -> Result<Vec<SweepRow>, CliError> {
    let mut layers = parse_layers(&base.model.layers)?;
    if layers.len() != 2 {
        return Err(CliError::Usage("sweep expects a two-layer model".into()));
    }
    let mut rows = Vec::with_capacity(contrasts.len());
    for &c2 in contrasts {
        let mut cfg = base.clone();
        layers[1].speed = c2;
        cfg.model.layers = format_layers(&layers);
        cfg.model.c_inf = None;
        cfg.run.epsilon = epsilon;
        let plan = cfg.plan()?;
        let oneway = OneWaySolver::new(plan.clone()).run()?;
        let full = FdSolver::new(plan.clone(), cfg.fullwave)?.run()?;
        let q = q_metric(&full, &oneway.total, plan.shot.source_x)?;
        rows.push(SweepRow {
            lower_speed: c2,
            near_shot_error: q.near_shot_error(near),
            half_width: q.half_width(tolerance),
            q,
        });
    }
    Ok(rows)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<PathBuf, CliError> {
    let cfg = Config::from_path(&args.config)?;
    let hash = config_hash(&format!(
        "sweep\n{}\ncontrasts={:?}\nepsilon={}\ntol={}\nnear={}",
        cfg.to_toml(),
        args.contrasts,
        args.epsilon,
        args.tolerance,
        args.near
    ));
    let dir = run_dir(&args.out, &hash)?;
    let rows = contrast_sweep(&cfg, &args.contrasts, args.epsilon, args.tolerance, args.near)?;
    let mut summary = csv::Writer::from_path(dir.join("summary.csv")).map_err(|e| CliError::Io(e.to_string()))?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    summary
        .write_record(["lower_speed", "near_shot_error", "half_width"])
        .map_err(io)?;
    let mut files = vec!["summary.csv".to_string()];
    for row in &rows {
        let name = format!("q_{}.csv", row.lower_speed);
        row.q.write_csv(&dir.join(&name))?;
        files.push(name);
        summary
            .write_record([
                row.lower_speed.to_string(),
                row.near_shot_error.map_or("NaN".to_string(), |e| e.to_string()),
                row.half_width.to_string(),
            ])
            .map_err(io)?;
        println!(
            "c2 = {:>7} m/s  near-shot |Q-1| = {:>8}  half-width = {:>7} m",
            row.lower_speed,
            row.near_shot_error.map_or("n/a".to_string(), |e| format!("{e:.4}")),
            row.half_width
        );
    }
    summary.flush()?;
    write_manifest(
        &dir,
        json!({
            "command": "sweep",
            "config_hash": hash,
            "config": cfg.to_toml(),
            "contrasts": args.contrasts,
            "epsilon": args.epsilon,
            "files": files,
        }),
    )?;
    Ok(dir)
}

/// Worker count from the flag, then the environment.
pub fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(cli.workers)? {
        if n == 0 {
            return Err(CliError::Usage("worker count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Oneway(a) => cmd_oneway(a).map(|d| println!("{}", d.display())),
        Command::Fullwave(a) => cmd_fullwave(a).map(|d| println!("{}", d.display())),
        Command::Qcurve(a) => cmd_qcurve(a).map(|q| {
            let defined = q.defined.iter().filter(|d| **d).count();
            println!("{} ({defined} of {} receivers defined)", a.out.display(), q.x.len());
        }),
        Command::Sweep(a) => cmd_sweep(a).map(|d| println!("{}", d.display())),
    })
}
