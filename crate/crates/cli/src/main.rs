use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "optomech", version, about = "Stationary entanglement of a cavity-mirror-condensate system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct PointArgs {
    /// Key-value parameter file (`key = value`, SI units, `_hz` keys in Hz).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override one parameter, e.g. `--set temperature=1e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Lyapunov solver (overrides `lyapunov_solver` in the config).
    #[arg(long)]
    pub solver: Option<String>,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
pub struct SpecSource {
    /// Named preset.
    #[arg(long)]
    pub preset: Option<String>,
    /// Sweep spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary state and entanglement report of one parameter point.
    Steady {
        #[command(flatten)]
        point: PointArgs,
        /// Also write the covariance matrix as text.
        #[arg(long)]
        covariance_out: Option<PathBuf>,
    },
    /// Run a parameter sweep and write `<name>.csv` and `<name>.json`.
    Sweep {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Ignore the cache directory even if the environment names one.
        #[arg(long)]
        no_cache: bool,
    },
    /// Compare the Lyapunov covariance with the stochastic simulator.
    Verify {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        trajectories: usize,
        #[arg(long, default_value_t = 5.0)]
        z_threshold: f64,
        /// Stochastic integrator (overrides `integrator` in the config).
        #[arg(long)]
        integrator: Option<String>,
        /// Sample-phase steps per trajectory.
        #[arg(long)]
        sample_steps: Option<usize>,
        /// z-score table output (CSV).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump sample-phase states every N steps to a binary record file.
        #[arg(long, requires = "record_stride")]
        records: Option<PathBuf>,
        #[arg(long)]
        record_stride: Option<usize>,
    },
    /// Probe readout of the cavity-condensate entanglement.
    Probe {
        #[command(flatten)]
        point: PointArgs,
        /// Readout gain used to design the probe.
        #[arg(long, default_value_t = 2.0)]
        gain: f64,
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        /// Estimate the measured covariance from simulator records instead.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Hurwitz test over a 1-2 axis grid.
    StabilityMap {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List solvers, integrators and presets.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Steady { point, covariance_out } => commands::steady(&point, covariance_out.as_deref()),
        Command::Sweep {
            source,
            out_dir,
            no_cache,
        } => commands::sweep(&source, &out_dir, no_cache),
        Command::Verify {
            point,
            seed,
            trajectories,
            z_threshold,
            integrator,
            sample_steps,
            out,
            records,
            record_stride,
        } => commands::verify(commands::VerifyArgs {
            point: &point,
            seed,
            trajectories,
            z_threshold,
            integrator: integrator.as_deref(),
            sample_steps,
            out: out.as_deref(),
            records: records.as_deref(),
            record_stride,
        }),
        Command::Probe {
            point,
            gain,
            phase,
            records,
            seed,
        } => commands::probe(&point, gain, phase, records.as_deref(), seed),
        Command::StabilityMap { source, out } => commands::stability_map(&source, out.as_deref()),
        Command::List => commands::list(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
