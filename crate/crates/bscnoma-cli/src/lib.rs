//! Command-line front end: reads a flat configuration, runs one experiment
//! and writes its data file next to a run manifest.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible optimization,
//! 4 code construction error, 1 anything else (I/O, simulation).

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::path::{Path, PathBuf};

use bscnoma::codec::{build_code_from, CodeSpec, CodecError};
use bscnoma::designs::{design_for, DesignError};
use bscnoma::mcsim::{
    mean_channel, run_ee_sweep, simulate_far_user_ber, simulate_uncoded_bpsk, trial_channel, Mode, SimError, SweepSpec,
};
use bscnoma::optimizer::{alternating_optimize, EeResult, OptError};
use bscnoma::qcldpc::{base_matrix, expand, field_size_for, joint_components, CodeError, ParityCheckMatrix};
use bscnoma::sysmodel::{ChannelState, PowerAllocation};
use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

pub use config::{ChannelSel, ConfigError, Format, ModeSel, RunConfig};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "BSCNOMA_SEED";

#[derive(Debug, Parser)]
#[command(name = "bscnoma", version, about = "Energy-efficiency and joint-decoding experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Experiment,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Data file to write; the manifest goes to `<out>.manifest`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_arg::<Format>)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_parser = parse_arg::<ModeSel>)]
    pub mode: Option<ModeSel>,
}

fn parse_arg<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Experiment {
    /// Mean energy efficiency over Rayleigh draws along one parameter grid.
    EeSweep,
    /// Outer-loop trajectories for each `η` in `eta_list`.
    Convergence,
    /// Far-user BER of the joint two-slot decoder.
    Ber,
    /// Writes the expanded QC-LDPC array in alist format.
    ConstructCode,
    /// One optimization at the configured channel.
    OptimizeOnce,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::EeSweep => "ee-sweep",
            Experiment::Convergence => "convergence",
            Experiment::Ber => "ber",
            Experiment::ConstructCode => "construct-code",
            Experiment::OptimizeOnce => "optimize-once",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("seed override {SEED_ENV}=`{0}` is not a u64")]
    EnvSeed(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("code construction: {0}")]
    Construction(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("serialization: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } | CliError::EnvSeed(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Construction(_) => 4,
            CliError::Sim(SimError::Codec(_)) => 4,
            CliError::Sim(SimError::NoFeasibleDraw(_)) => 3,
            CliError::Sim(SimError::Optimizer(OptError::StageInfeasible(_))) => 3,
            CliError::Sim(SimError::BadGrid) | CliError::Sim(SimError::Optimizer(_)) => 2,
            CliError::Write { .. } | CliError::Serialize(_) => 1,
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        CliError::Construction(e.to_string())
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        CliError::Construction(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Construction(e.to_string())
    }
}

/// Applies defaults, then the file, then the environment seed, then flags.
pub fn resolve_config(cli: &Cli, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            RunConfig::parse_text(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = env_seed {
        cfg.seed = s.trim().parse().map_err(|_| CliError::EnvSeed(s.into()))?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Default data file name of an experiment.
pub fn default_out(exp: Experiment, format: Format) -> PathBuf {
    let ext = if exp == Experiment::ConstructCode { "alist" } else { format.name() };
    PathBuf::from(format!("{}.{ext}", exp.name()))
}

/// Path of the manifest written beside `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// The manifest text: comments naming the run, then the resolved configuration.
pub fn manifest(exp: Experiment, cfg: &RunConfig) -> String {
    format!(
        "# bscnoma run manifest\n# experiment: {}\n# bscnoma-cli {}\n# rerun with: bscnoma {} --config <this file>\n{}",
        exp.name(),
        env!("CARGO_PKG_VERSION"),
        exp.name(),
        cfg.to_text()
    )
}

/// Runs the parsed command line and returns the files written.
pub fn run(cli: &Cli, env_seed: Option<&str>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(cli, env_seed)?;
    let out = cli.out.clone().unwrap_or_else(|| default_out(cli.command, cfg.format));
    // Everything is computed before the first file is touched.
    let data = render(cli.command, &cfg)?;
    let man = manifest_path(&out);
    write(&out, &data)?;
    write(&man, manifest(cli.command, &cfg).as_bytes())?;
    Ok(vec![out, man])
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Produces the data file contents of one experiment.
pub fn render(exp: Experiment, cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    match exp {
        Experiment::EeSweep => ee_sweep(cfg),
        Experiment::Convergence => convergence(cfg),
        Experiment::Ber => ber(cfg),
        Experiment::ConstructCode => Ok(expanded_matrix(cfg)?.to_alist().into_bytes()),
        Experiment::OptimizeOnce => optimize_once(cfg),
    }
}

fn emit<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Serialize(e.to_string());
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(rows).map_err(|e| err(&e))?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| err(&e))?;
            }
            w.into_inner().map_err(|e| err(&e))
        }
    }
}

fn ee_sweep(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let spec = SweepSpec {
        variable: cfg.sweep_variable,
        grid: cfg.grid(),
        trials_per_point: cfg.trials,
        modes: cfg.mode.modes(),
        seed: cfg.seed,
    };
    let rows = run_ee_sweep(&spec, &cfg.system(), &cfg.geometry, &cfg.optimizer)?;
    emit(&rows, cfg.format)
}

/// The channel used by the single-channel experiments.
pub fn chosen_channel(cfg: &RunConfig) -> ChannelState {
    match cfg.channel {
        ChannelSel::Mean => mean_channel(&cfg.geometry),
        ChannelSel::Draw => trial_channel(&cfg.geometry, cfg.seed, cfg.draw),
    }
}

fn optimize(cfg: &RunConfig, mode: Mode, eta: f64) -> Result<EeResult, CliError> {
    let s = mode.apply(&bscnoma::sysmodel::SystemParams { eta, ..cfg.system() });
    let r = alternating_optimize(&chosen_channel(cfg), &s, &cfg.optimizer).map_err(SimError::from)?;
    if r.outer_iterations == 0 || !r.feasibility.feasible() {
        return Err(CliError::Infeasible(format!("no feasible allocation for mode {} at eta {eta}", mode.name())));
    }
    Ok(r)
}

#[derive(Serialize)]
struct ConvergenceRow {
    mode: &'static str,
    eta: f64,
    iteration: usize,
    gamma_ee_bits_per_joule: f64,
    approx_sum_rate_bps: f64,
    total_power_w: f64,
    residual_bps: f64,
}

fn convergence(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    for mode in cfg.mode.modes() {
        for &eta in &cfg.eta_list {
            let r = optimize(cfg, mode, eta)?;
            for (i, t) in r.trajectory.iter().enumerate() {
                rows.push(ConvergenceRow {
                    mode: mode.name(),
                    eta,
                    iteration: i + 1,
                    gamma_ee_bits_per_joule: t.gamma_ee,
                    approx_sum_rate_bps: t.approx_sum_rate,
                    total_power_w: t.total_power,
                    residual_bps: t.residual(),
                });
            }
        }
    }
    emit(&rows, cfg.format)
}

#[derive(Serialize)]
struct OnceRow {
    mode: &'static str,
    p_w: f64,
    xi_n: f64,
    xi_f: f64,
    p_r_w: f64,
    gamma_ee_bits_per_joule: f64,
    outer_iterations: usize,
    converged: bool,
    feasible: bool,
}

#[derive(Serialize)]
struct OnceReport {
    mode: &'static str,
    allocation: PowerAllocation,
    gamma_ee_bits_per_joule: f64,
    outer_iterations: usize,
    converged: bool,
    feasible: bool,
    trajectory: Vec<bscnoma::optimizer::TrajectoryPoint>,
}

fn optimize_once(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let runs = cfg
        .mode
        .modes()
        .into_iter()
        .map(|m| optimize(cfg, m, cfg.eta).map(|r| (m, r)))
        .collect::<Result<Vec<_>, _>>()?;
    match cfg.format {
        Format::Csv => {
            let rows: Vec<OnceRow> = runs
                .iter()
                .map(|(m, r)| OnceRow {
                    mode: m.name(),
                    p_w: r.allocation.p,
                    xi_n: r.allocation.xi_n,
                    xi_f: r.allocation.xi_f,
                    p_r_w: r.allocation.p_r,
                    gamma_ee_bits_per_joule: r.gamma_ee,
                    outer_iterations: r.outer_iterations,
                    converged: r.converged,
                    feasible: r.feasibility.feasible(),
                })
                .collect();
            emit(&rows, Format::Csv)
        }
        Format::Json => {
            let rows: Vec<OnceReport> = runs
                .into_iter()
                .map(|(m, r)| OnceReport {
                    mode: m.name(),
                    allocation: r.allocation,
                    gamma_ee_bits_per_joule: r.gamma_ee,
                    outer_iterations: r.outer_iterations,
                    converged: r.converged,
                    feasible: r.feasibility.feasible(),
                    trajectory: r.trajectory,
                })
                .collect();
            emit(&rows, Format::Json)
        }
    }
}

/// The expanded circulant array for `(w, v, sigma)`.
pub fn expanded_matrix(cfg: &RunConfig) -> Result<ParityCheckMatrix, CliError> {
    let (_, design) = design_for(cfg.w, cfg.v)?;
    let sigma = cfg.sigma.unwrap_or_else(|| field_size_for(design.omega));
    Ok(expand(&base_matrix(&design, sigma)?)?)
}

/// The joint code carved out of the expanded array by the configured layout.
pub fn joint_code(cfg: &RunConfig) -> Result<CodeSpec, CliError> {
    let hb = expanded_matrix(cfg)?;
    Ok(build_code_from(&joint_components(&hb, &cfg.layout)?)?)
}

#[derive(Serialize)]
struct BerRow {
    receiver: &'static str,
    max_iters: usize,
    snr_db: f64,
    bit_errors: u64,
    bits_simulated: u64,
    ber: f64,
    mean_iterations: f64,
}

fn ber(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let code = joint_code(cfg)?;
    let points = simulate_far_user_ber(&code, &cfg.ber_setup())?;
    let mut rows: Vec<BerRow> = points
        .iter()
        .map(|p| BerRow {
            receiver: p.receiver.name(),
            max_iters: p.max_iters,
            snr_db: p.snr_db,
            bit_errors: p.bit_errors,
            bits_simulated: p.bits_simulated,
            ber: p.ber,
            mean_iterations: p.decoder_iterations,
        })
        .collect();
    // Uncoded BPSK at the same per-symbol SNR, for calibrating the harness.
    for &snr_db in &cfg.snr_db {
        let (errors, bits) = simulate_uncoded_bpsk(10f64.powf(snr_db / 10.0), cfg.min_bits, cfg.seed);
        rows.push(BerRow {
            receiver: "uncoded_bpsk",
            max_iters: 0,
            snr_db,
            bit_errors: errors,
            bits_simulated: bits,
            ber: errors as f64 / bits as f64,
            mean_iterations: 0.0,
        });
    }
    emit(&rows, cfg.format)
}
