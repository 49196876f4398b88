//! Command-line front end: regime classification, event-exact simulation,
//! density tables, blow-up ensembles, the Hopf lift, and the application
//! models, all reproducible from a single seed and exportable as a config.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 runtime failure
//! (e.g. quadrature non-convergence), 4 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pdmp::applications::rm::{rm_field, RMParams};
use pdmp::applications::swarm::{
    swarm_disordered_state, swarm_field, swarm_ordered_branch, swarm_pitchfork_threshold,
    SwarmParams, SwarmVariant,
};
use pdmp::applications::switched::{
    switched_simulate_general, GeneralSwitchedSpec,
};
use pdmp::applications::vdp::{vdp_equilibrium_count, vdp_fold_points};
use pdmp::engine::{self, write_trajectory_csv, Histogram, Mode, StopCondition, SwitchingSpec};
use pdmp::error::Error;
use pdmp::normal_forms::NormalFormKind;
use pdmp::{classify, DensityModel};

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "pdmp", version, about = "Randomly switched bifurcation normal forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the switching regime and print the report as JSON
    Classify(ClassifyArgs),
    /// Run one trajectory or an ensemble of the exact engine
    Simulate(SimulateArgs),
    /// Tabulate the analytic invariant density
    Density(DensityArgs),
    /// Estimate blow-up fractions over an ensemble
    Blowup(BlowupArgs),
    /// Simulate the planar Hopf lift and its radial occupation
    Hopf(HopfArgs),
    /// Run one of the application models
    App(AppArgs),
    /// Print the normalized config of a command line as JSON
    DumpConfig(DumpConfigArgs),
}

#[derive(Args)]
struct DumpConfigArgs {
    #[command(subcommand)]
    command: RunCommand,
}

#[derive(Subcommand)]
enum RunCommand {
    Classify(ClassifyArgs),
    Simulate(SimulateArgs),
    Density(DensityArgs),
    Blowup(BlowupArgs),
    Hopf(HopfArgs),
    App(AppArgs),
}

// ---------------------------------------------------------------------------
// flag groups

#[derive(Args, Clone)]
struct SpecFlags {
    /// Normal form kind (sup-pitchfork, sub-pitchfork, transcritical, fold,
    /// sup-hopf-radial, sub-hopf-radial)
    #[arg(long, required_unless_present = "config")]
    kind: Option<String>,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "config")]
    p_minus: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    p_plus: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    lambda_minus: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    lambda_plus: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecCfg {
    kind: NormalFormKind,
    p_minus: f64,
    p_plus: f64,
    lambda_minus: f64,
    lambda_plus: f64,
}

impl SpecCfg {
    fn build(&self) -> Result<SwitchingSpec, Error> {
        SwitchingSpec::new(self.kind, self.p_minus, self.p_plus, self.lambda_minus, self.lambda_plus)
    }
}

fn parse_kind(s: &str) -> Result<NormalFormKind, Error> {
    serde_json::from_value(json!(s))
        .map_err(|_| Error::InvalidSpec(format!("unknown normal form kind '{s}'")))
}

impl SpecFlags {
    fn resolve(&self) -> Result<SpecCfg, Error> {
        Ok(SpecCfg {
            kind: parse_kind(self.kind.as_deref().expect("enforced by clap"))?,
            p_minus: self.p_minus.expect("enforced by clap"),
            p_plus: self.p_plus.expect("enforced by clap"),
            lambda_minus: self.lambda_minus.expect("enforced by clap"),
            lambda_plus: self.lambda_plus.expect("enforced by clap"),
        })
    }
}

fn parse_mode(i0: i8) -> Result<Mode, Error> {
    Mode::from_i8(i0)
}

// ---------------------------------------------------------------------------
// per-command args and configs

#[derive(Args)]
struct ClassifyArgs {
    /// JSON config produced by dump-config; overrides the flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecFlags,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecFlags,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    x0: f64,
    /// Initial mode, -1 or 1
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    i0: i8,
    #[arg(long, default_value_t = 1e3)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV (single run) or per-run summary CSV (ensemble)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Occupation histogram CSV (single run only)
    #[arg(long)]
    hist_out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long, allow_negative_numbers = true)]
    hist_lo: Option<f64>,
    #[arg(long)]
    hist_hi: Option<f64>,
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long)]
    sample_dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HistCfg {
    bins: usize,
    lo: f64,
    hi: f64,
    burn_in: Option<f64>,
    sample_dt: Option<f64>,
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecFlags,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Number of table rows over the support
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlowupArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecFlags,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    x0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    i0: i8,
    #[arg(long, default_value_t = 1e4)]
    horizon: f64,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of per-run outcomes
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HopfArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecFlags,
    #[arg(long, default_value_t = 0.5)]
    r0: f64,
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    i0: i8,
    #[arg(long, default_value_t = 1e4)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long)]
    sample_dt: Option<f64>,
    /// Radial histogram CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AppArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    model: Option<AppModel>,
}

#[derive(Subcommand, Clone)]
enum AppModel {
    /// Predator-prey model with switched carrying capacity
    Rm(RmArgs),
    /// Equilibrium scan of the van der Pol fast subsystem
    Vdp(VdpArgs),
    /// Bifurcation diagnostics of the swarming closure
    Swarm(SwarmArgs),
}

#[derive(Args, Clone)]
struct RmArgs {
    /// Carrying capacity in mode -1
    #[arg(long, default_value_t = 1.5)]
    p_minus: f64,
    /// Carrying capacity in mode +1
    #[arg(long, default_value_t = 2.5)]
    p_plus: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_minus: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_plus: f64,
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    i0: i8,
    #[arg(long, default_value_t = 1e3)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    record_dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled trajectory CSV (t, x, y, mode)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VdpArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = -1.5)]
    p_lo: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.5)]
    p_hi: f64,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// Scan CSV (p, equilibrium_count)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SwarmArgs {
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    w2: f64,
    #[arg(long, default_value_t = 2.0)]
    w3: f64,
    #[arg(long, default_value_t = 3.0)]
    a0: f64,
    #[arg(long, default_value_t = 1.0)]
    d0: f64,
    /// Equation reading: verbatim or symmetrized
    #[arg(long, default_value = "symmetrized")]
    variant: String,
}

/// The normalized, re-runnable description of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
enum RunConfig {
    Classify {
        spec: SpecCfg,
    },
    Simulate {
        spec: SpecCfg,
        x0: f64,
        i0: i8,
        horizon: f64,
        runs: usize,
        seed: u64,
        out: Option<PathBuf>,
        histogram: Option<HistCfg>,
    },
    Density {
        spec: SpecCfg,
        tol: f64,
        grid: usize,
        out: Option<PathBuf>,
    },
    Blowup {
        spec: SpecCfg,
        x0: f64,
        i0: i8,
        horizon: f64,
        runs: usize,
        seed: u64,
        out: Option<PathBuf>,
    },
    Hopf {
        spec: SpecCfg,
        r0: f64,
        theta0: f64,
        i0: i8,
        horizon: f64,
        seed: u64,
        bins: usize,
        burn_in: Option<f64>,
        sample_dt: Option<f64>,
        out: Option<PathBuf>,
    },
    App(AppCfg),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
enum AppCfg {
    Rm {
        p_minus: f64,
        p_plus: f64,
        lambda_minus: f64,
        lambda_plus: f64,
        x0: f64,
        y0: f64,
        i0: i8,
        horizon: f64,
        step: f64,
        record_dt: f64,
        seed: u64,
        out: Option<PathBuf>,
    },
    Vdp {
        p_lo: f64,
        p_hi: f64,
        grid: usize,
        out: Option<PathBuf>,
    },
    Swarm {
        q: f64,
        w2: f64,
        w3: f64,
        a0: f64,
        d0: f64,
        variant: SwarmVariant,
    },
}

// ---------------------------------------------------------------------------
// error mapping and output plumbing

enum CliError {
    Invalid(String),
    Runtime(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::Domain(_) | Error::Regime(_) => {
                CliError::Invalid(e.to_string())
            }
            Error::Quadrature(_) | Error::InsufficientSamples(_) => {
                CliError::Runtime(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Writes through a temp file in the same directory and renames into place,
/// so a crash never leaves a half-written artifact.
fn write_atomic(path: &Path, body: &[u8]) -> CliResult<()> {
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    fs::write(&tmp, body).map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

fn print_summary(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("summary serialization"));
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let body = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&body)
        .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
}

fn expect_command(cfg: RunConfig, got: &str, want: &str) -> CliResult<RunConfig> {
    if got == want {
        Ok(cfg)
    } else {
        Err(CliError::Invalid(format!(
            "config is for command '{got}', but '{want}' was invoked"
        )))
    }
}

fn config_command_name(cfg: &RunConfig) -> &'static str {
    match cfg {
        RunConfig::Classify { .. } => "classify",
        RunConfig::Simulate { .. } => "simulate",
        RunConfig::Density { .. } => "density",
        RunConfig::Blowup { .. } => "blowup",
        RunConfig::Hopf { .. } => "hopf",
        RunConfig::App { .. } => "app",
    }
}

// ---------------------------------------------------------------------------
// arg -> config resolution

fn resolve(cmd: &RunCommand) -> CliResult<RunConfig> {
    match cmd {
        RunCommand::Classify(a) => {
            if let Some(path) = &a.config {
                let cfg = load_config(path)?;
                let name = config_command_name(&cfg);
                return expect_command(cfg, name, "classify");
            }
            Ok(RunConfig::Classify { spec: a.spec.resolve()? })
        }
        RunCommand::Simulate(a) => {
            if let Some(path) = &a.config {
                let cfg = load_config(path)?;
                let name = config_command_name(&cfg);
                return expect_command(cfg, name, "simulate");
            }
            let histogram = match (&a.hist_out, a.hist_lo, a.hist_hi) {
                (None, None, None) => None,
                (out, lo, hi) => {
                    let (lo, hi) = match (lo, hi) {
                        (Some(lo), Some(hi)) => (lo, hi),
                        _ => {
                            return Err(CliError::Invalid(
                                "histogram output needs both --hist-lo and --hist-hi".into(),
                            ))
                        }
                    };
                    Some(HistCfg {
                        bins: a.bins,
                        lo,
                        hi,
                        burn_in: a.burn_in,
                        sample_dt: a.sample_dt,
                        out: out.clone(),
                    })
                }
            };
            Ok(RunConfig::Simulate {
                spec: a.spec.resolve()?,
                x0: a.x0,
                i0: a.i0,
                horizon: a.horizon,
                runs: a.runs,
                seed: a.seed,
                out: a.out.clone(),
                histogram,
            })
        }
        RunCommand::Density(a) => {
            if let Some(path) = &a.config {
                let cfg = load_config(path)?;
                let name = config_command_name(&cfg);
                return expect_command(cfg, name, "density");
            }
            Ok(RunConfig::Density {
                spec: a.spec.resolve()?,
                tol: a.tol,
                grid: a.grid,
                out: a.out.clone(),
            })
        }
        RunCommand::Blowup(a) => {
            if let Some(path) = &a.config {
                let cfg = load_config(path)?;
                let name = config_command_name(&cfg);
                return expect_command(cfg, name, "blowup");
            }
            Ok(RunConfig::Blowup {
                spec: a.spec.resolve()?,
                x0: a.x0,
                i0: a.i0,
                horizon: a.horizon,
                runs: a.runs,
                seed: a.seed,
                out: a.out.clone(),
            })
        }
        RunCommand::Hopf(a) => {
            if let Some(path) = &a.config {
                let cfg = load_config(path)?;
                let name = config_command_name(&cfg);
                return expect_command(cfg, name, "hopf");
            }
            Ok(RunConfig::Hopf {
                spec: a.spec.resolve()?,
                r0: a.r0,
                theta0: a.theta0,
                i0: a.i0,
                horizon: a.horizon,
                seed: a.seed,
                bins: a.bins,
                burn_in: a.burn_in,
                sample_dt: a.sample_dt,
                out: a.out.clone(),
            })
        }
        RunCommand::App(a) => {
            if let Some(path) = &a.config {
                let cfg = load_config(path)?;
                let name = config_command_name(&cfg);
                return expect_command(cfg, name, "app");
            }
            let model = a.model.clone().ok_or_else(|| {
                CliError::Invalid("app needs a model subcommand (rm, vdp, swarm) or --config".into())
            })?;
            let cfg = match model {
                AppModel::Rm(m) => AppCfg::Rm {
                    p_minus: m.p_minus,
                    p_plus: m.p_plus,
                    lambda_minus: m.lambda_minus,
                    lambda_plus: m.lambda_plus,
                    x0: m.x0,
                    y0: m.y0,
                    i0: m.i0,
                    horizon: m.horizon,
                    step: m.step,
                    record_dt: m.record_dt,
                    seed: m.seed,
                    out: m.out.clone(),
                },
                AppModel::Vdp(m) => AppCfg::Vdp {
                    p_lo: m.p_lo,
                    p_hi: m.p_hi,
                    grid: m.grid,
                    out: m.out.clone(),
                },
                AppModel::Swarm(m) => AppCfg::Swarm {
                    q: m.q,
                    w2: m.w2,
                    w3: m.w3,
                    a0: m.a0,
                    d0: m.d0,
                    variant: serde_json::from_value(json!(m.variant)).map_err(|_| {
                        CliError::Invalid(format!("unknown swarm variant '{}'", m.variant))
                    })?,
                },
            };
            Ok(RunConfig::App(cfg))
        }
    }
}

// ---------------------------------------------------------------------------
// command execution

fn float_cell(v: f64) -> String {
    // shortest representation that round-trips
    format!("{v}")
}

fn histogram_csv(hist: &Histogram) -> String {
    let mut s = String::from("bin_lo,bin_hi,density_minus,density_plus,density_marginal\n");
    let w = hist.bin_width();
    for b in 0..hist.bins {
        let lo = hist.lo + b as f64 * w;
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            float_cell(lo),
            float_cell(lo + w),
            float_cell(hist.density_minus(b)),
            float_cell(hist.density_plus(b)),
            float_cell(hist.density_marginal(b)),
        ));
    }
    s
}

fn run_classify(spec: SpecCfg) -> CliResult<()> {
    let report = classify(&spec.build()?)?;
    print_summary(&serde_json::to_value(&report).expect("report serialization"));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    spec: SpecCfg,
    x0: f64,
    i0: i8,
    horizon: f64,
    runs: usize,
    seed: u64,
    out: Option<PathBuf>,
    histogram: Option<HistCfg>,
) -> CliResult<()> {
    let sw = spec.build()?;
    let stop = StopCondition::with_horizon(horizon);
    let mode = parse_mode(i0)?;
    if runs == 1 {
        let traj = engine::simulate(&sw, x0, mode, &stop, seed)?;
        if let Some(path) = &out {
            let mut body = Vec::new();
            write_trajectory_csv(&traj, &mut body)?;
            write_atomic(path, &body)?;
        }
        let mut summary = json!({
            "command": "simulate",
            "seed": seed,
            "runs": 1,
            "status": serde_json::to_value(&traj.status).expect("status serialization"),
            "end_time": traj.end_time(),
            "segments": traj.segments.len(),
        });
        if let Some(h) = &histogram {
            let hist = engine::occupation_histogram(
                &traj,
                h.bins,
                (h.lo, h.hi),
                h.burn_in.unwrap_or_else(|| engine::default_burn_in(&sw)),
                h.sample_dt.unwrap_or_else(|| engine::default_sample_dt(&sw)),
            )?;
            if let Some(path) = &h.out {
                write_atomic(path, histogram_csv(&hist).as_bytes())?;
            }
            summary["histogram"] = json!({
                "samples": hist.samples,
                "out_of_range": hist.out_of_range,
                "mode_mass_minus": hist.mode_mass_minus(),
                "mode_mass_plus": hist.mode_mass_plus(),
            });
        }
        print_summary(&summary);
        return Ok(());
    }

    if histogram.is_some() {
        return Err(CliError::Invalid(
            "occupation histograms apply to a single run; drop --hist-out or set --runs 1".into(),
        ));
    }
    let ensemble = engine::simulate_ensemble(&sw, &[(x0, mode)], &stop, runs, seed)?;
    let mut horizon_reached = 0usize;
    let mut blew_up = 0usize;
    let mut absorbed = 0usize;
    let mut csv = String::from("run,seed,status,end_time\n");
    for (k, traj) in ensemble.iter().enumerate() {
        let label = match traj.status {
            engine::TrajectoryStatus::HorizonReached => {
                horizon_reached += 1;
                "horizon_reached"
            }
            engine::TrajectoryStatus::BlewUp { .. } => {
                blew_up += 1;
                "blew_up"
            }
            engine::TrajectoryStatus::Absorbed { .. } => {
                absorbed += 1;
                "absorbed"
            }
        };
        csv.push_str(&format!("{k},{},{label},{}\n", traj.rng_seed, float_cell(traj.end_time())));
    }
    if let Some(path) = &out {
        write_atomic(path, csv.as_bytes())?;
    }
    print_summary(&json!({
        "command": "simulate",
        "seed": seed,
        "runs": runs,
        "horizon_reached": horizon_reached,
        "blew_up": blew_up,
        "absorbed": absorbed,
    }));
    Ok(())
}

fn run_density(spec: SpecCfg, tol: f64, grid: usize, out: Option<PathBuf>) -> CliResult<()> {
    if grid == 0 {
        return Err(CliError::Invalid("--grid must be at least 1".into()));
    }
    let sw = spec.build()?;
    let model = DensityModel::new(&sw, tol)?;
    let (lo, hi) = model.support();
    if let Some(path) = &out {
        let mut csv = String::from("x,rho_minus,rho_plus,rho_marginal\n");
        for k in 0..grid {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / grid as f64;
            csv.push_str(&format!(
                "{},{},{},{}\n",
                float_cell(x),
                float_cell(model.density(Mode::Minus, x)),
                float_cell(model.density(Mode::Plus, x)),
                float_cell(model.density_marginal(x)),
            ));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    let (mass_minus, mass_plus) = model.mode_masses();
    print_summary(&json!({
        "command": "density",
        "support": [lo, hi],
        "normalization": model.normalization(),
        "mass_minus": mass_minus,
        "mass_plus": mass_plus,
        "tol": tol,
        "grid": grid,
    }));
    Ok(())
}

fn run_blowup(
    spec: SpecCfg,
    x0: f64,
    i0: i8,
    horizon: f64,
    runs: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let sw = spec.build()?;
    let stop = StopCondition::with_horizon(horizon);
    let ensemble = engine::simulate_ensemble(&sw, &[(x0, parse_mode(i0)?)], &stop, runs, seed)?;
    let (fraction, times) = pdmp::blowup_fraction(&ensemble)?;
    if let Some(path) = &out {
        let mut csv = String::from("run,status,blow_up_time\n");
        for (k, traj) in ensemble.iter().enumerate() {
            match traj.status {
                engine::TrajectoryStatus::BlewUp { t, .. } => {
                    csv.push_str(&format!("{k},blew_up,{}\n", float_cell(t)));
                }
                engine::TrajectoryStatus::HorizonReached => {
                    csv.push_str(&format!("{k},horizon_reached,\n"));
                }
                engine::TrajectoryStatus::Absorbed { .. } => {
                    csv.push_str(&format!("{k},absorbed,\n"));
                }
            }
        }
        write_atomic(path, csv.as_bytes())?;
    }
    let mean_time = if times.is_empty() {
        serde_json::Value::Null
    } else {
        json!(times.iter().sum::<f64>() / times.len() as f64)
    };
    print_summary(&json!({
        "command": "blowup",
        "seed": seed,
        "runs": runs,
        "fraction": fraction,
        "blow_up_count": times.len(),
        "mean_blow_up_time": mean_time,
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_hopf(
    spec: SpecCfg,
    r0: f64,
    theta0: f64,
    i0: i8,
    horizon: f64,
    seed: u64,
    bins: usize,
    burn_in: Option<f64>,
    sample_dt: Option<f64>,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let sw = spec.build()?;
    let stop = StopCondition::with_horizon(horizon);
    let planar = engine::hopf_simulate(&sw, theta0, r0, parse_mode(i0)?, &stop, seed)?;
    let burn_in = burn_in.unwrap_or_else(|| engine::default_burn_in(&sw));
    let sample_dt = sample_dt.unwrap_or_else(|| engine::default_sample_dt(&sw));
    let hi = sw.p_plus.sqrt() * 1.2;
    let hist = engine::occupation_histogram(&planar.radial, bins, (0.0, hi), burn_in, sample_dt)?;
    if let Some(path) = &out {
        write_atomic(path, histogram_csv(&hist).as_bytes())?;
    }
    // KS statistic of the sampled angles against uniform(0, 2pi)
    let mut angles = Vec::new();
    let mut t = burn_in;
    while t <= horizon {
        angles.push(planar.theta_at(t) / std::f64::consts::TAU);
        t += sample_dt;
    }
    angles.sort_by(|a, b| a.partial_cmp(b).expect("angles are finite"));
    let n = angles.len() as f64;
    let mut ks = 0.0f64;
    for (k, u) in angles.iter().enumerate() {
        ks = ks.max((u - k as f64 / n).abs()).max(((k + 1) as f64 / n - u).abs());
    }
    print_summary(&json!({
        "command": "hopf",
        "seed": seed,
        "status": serde_json::to_value(&planar.radial.status).expect("status serialization"),
        "samples": hist.samples,
        "mode_mass_minus": hist.mode_mass_minus(),
        "mode_mass_plus": hist.mode_mass_plus(),
        "angular_ks": ks,
    }));
    Ok(())
}

fn run_app(cfg: AppCfg) -> CliResult<()> {
    match cfg {
        AppCfg::Rm {
            p_minus,
            p_plus,
            lambda_minus,
            lambda_plus,
            x0,
            y0,
            i0,
            horizon,
            step,
            record_dt,
            seed,
            out,
        } => {
            let below = RMParams::with_p(p_minus);
            let above = RMParams::with_p(p_plus);
            let mut spec = GeneralSwitchedSpec::new(
                move |mode: Mode, x: &[f64], dx: &mut [f64]| {
                    let params = if mode == Mode::Minus { below } else { above };
                    let (a, b) = rm_field(&params, (x[0], x[1]));
                    dx[0] = a;
                    dx[1] = b;
                    Ok(())
                },
                lambda_minus,
                lambda_plus,
            );
            spec.step_size = step;
            let traj = switched_simulate_general(
                &spec,
                &[x0, y0],
                parse_mode(i0)?,
                horizon,
                Some(record_dt),
                seed,
            )?;
            if let Some(path) = &out {
                let mut csv = String::from("t,x,y,mode\n");
                for s in &traj.samples {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        float_cell(s.t),
                        float_cell(s.state[0]),
                        float_cell(s.state[1]),
                        s.mode
                    ));
                }
                write_atomic(path, csv.as_bytes())?;
            }
            print_summary(&json!({
                "command": "app",
                "model": "rm",
                "seed": seed,
                "status": serde_json::to_value(&traj.status).expect("status serialization"),
                "switches": traj.switch_times.len(),
                "final_time": traj.final_time,
                "final_state": traj.final_state,
            }));
        }
        AppCfg::Vdp { p_lo, p_hi, grid, out } => {
            if grid < 2 {
                return Err(CliError::Invalid("--grid must be at least 2".into()));
            }
            if !(p_hi > p_lo) {
                return Err(CliError::Invalid(format!("empty scan range ({p_lo}, {p_hi})")));
            }
            let mut csv = String::from("p,equilibrium_count\n");
            for k in 0..grid {
                let p = p_lo + (p_hi - p_lo) * k as f64 / (grid - 1) as f64;
                csv.push_str(&format!("{},{}\n", float_cell(p), vdp_equilibrium_count(p)));
            }
            if let Some(path) = &out {
                write_atomic(path, csv.as_bytes())?;
            }
            let folds = vdp_fold_points();
            print_summary(&json!({
                "command": "app",
                "model": "vdp",
                "fold_points": [folds.0, folds.1],
                "grid": grid,
            }));
        }
        AppCfg::Swarm { q, w2, w3, a0, d0, variant } => {
            let params = SwarmParams { q, w2, w3, ae: 0.0, de: 0.0, a0, d0 };
            let threshold = swarm_pitchfork_threshold(q, w3, d0)?;
            let disordered = swarm_disordered_state(&params)?;
            // evaluating the field also surfaces the verbatim-reading error
            let residual = swarm_field(&params, variant, disordered)?;
            let ordered = swarm_ordered_branch(&params).ok();
            print_summary(&json!({
                "command": "app",
                "model": "swarm",
                "threshold": threshold,
                "disordered_state": disordered,
                "disordered_residual": residual,
                "ordered_branches": ordered.map(|(hi, lo)| vec![hi, lo]),
            }));
        }
    }
    Ok(())
}

fn run(cfg: RunConfig) -> CliResult<()> {
    match cfg {
        RunConfig::Classify { spec } => run_classify(spec),
        RunConfig::Simulate { spec, x0, i0, horizon, runs, seed, out, histogram } => {
            run_simulate(spec, x0, i0, horizon, runs, seed, out, histogram)
        }
        RunConfig::Density { spec, tol, grid, out } => run_density(spec, tol, grid, out),
        RunConfig::Blowup { spec, x0, i0, horizon, runs, seed, out } => {
            run_blowup(spec, x0, i0, horizon, runs, seed, out)
        }
        RunConfig::Hopf { spec, r0, theta0, i0, horizon, seed, bins, burn_in, sample_dt, out } => {
            run_hopf(spec, r0, theta0, i0, horizon, seed, bins, burn_in, sample_dt, out)
        }
        RunConfig::App(app) => run_app(app),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Classify(a) => resolve(&RunCommand::Classify(a)).and_then(run),
        Command::Simulate(a) => resolve(&RunCommand::Simulate(a)).and_then(run),
        Command::Density(a) => resolve(&RunCommand::Density(a)).and_then(run),
        Command::Blowup(a) => resolve(&RunCommand::Blowup(a)).and_then(run),
        Command::Hopf(a) => resolve(&RunCommand::Hopf(a)).and_then(run),
        Command::App(a) => resolve(&RunCommand::App(a)).and_then(run),
        Command::DumpConfig(d) => resolve(&d.command).map(|cfg| {
            print_summary(&serde_json::to_value(&cfg).expect("config serialization"));
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
