//! `ea-toolkit`: command-line access to the capacity, receiver, OPA, covert,
//! Monte Carlo and sweep routines of `ea-core`.
//!
//! Exit codes: 0 success, 1 domain or computation error (including a Monte
//! Carlo estimate outside tolerance), 2 usage error.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ea_core::sweep::PRESET_NAMES;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ea_core::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output: {0}")]
    Render(String),

    #[error("thread pool: {0}")]
    Threads(String),

    #[error("Monte Carlo estimate outside {limit} standard errors (max |z| = {max_z:.3})")]
    McOutside { max_z: f64, limit: f64 },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Accepts plain integers and integral scientific notation such as `1e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ea-toolkit",
    version,
    about = "Entanglement-assisted communication toolkit"
)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "EA_TOOLKIT_THREADS")]
    threads: Option<usize>,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Flat `key = value` file of flag defaults; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct ChannelArgs {
    /// Transmissivity, 0 < eta <= 1.
    #[arg(long)]
    eta: f64,
    /// Mean transmitted photons per mode.
    #[arg(long = "ns")]
    n_s: f64,
    /// Mean thermal photons per mode.
    #[arg(long = "nb")]
    n_b: f64,
}

#[derive(Debug, Clone, Args)]
struct ReceiverArgs {
    /// Modes per BPSK symbol.
    #[arg(long = "m", value_parser = parse_count)]
    m_modes: u64,
    /// Hadamard code order (power of two).
    #[arg(long = "n", value_parser = parse_count)]
    n_order: u64,
    /// SFG cascade stages [default: max(1000, ceil(100 N_B))].
    #[arg(long = "k", value_parser = parse_count)]
    k_stages: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CovertMode {
    All,
    Holevo,
    Opa,
    Jdr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Collapsed,
    Stages,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Holevo and entanglement-assisted capacities.
    #[command(args_override_self = true)]
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
    },

    /// Exact joint-detection rate at one code order.
    #[command(args_override_self = true)]
    Rate {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        receiver: ReceiverArgs,
    },

    /// Best rate over Hadamard orders 2..2^max-order-log2.
    #[command(args_override_self = true)]
    Envelope {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Modes per BPSK symbol.
        #[arg(long = "m", value_parser = parse_count)]
        m_modes: u64,
        /// SFG cascade stages [default: max(1000, ceil(100 N_B))].
        #[arg(long = "k", value_parser = parse_count)]
        k_stages: Option<u64>,
        #[arg(long, default_value_t = ea_core::receiver::DEFAULT_MAX_ORDER_LOG2)]
        max_order_log2: u32,
    },

    /// OPA receiver: leading-order capacity, exact mutual information, gain.
    #[command(args_override_self = true)]
    Opa {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Amplifier gain G > 1.
        #[arg(long)]
        gain: f64,
        /// Modes per block.
        #[arg(long = "m", value_parser = parse_count, default_value_t = 1)]
        m_modes: u64,
        /// Fix the prior P(theta = pi) instead of optimizing it.
        #[arg(long = "q")]
        q_prior: Option<f64>,
    },

    /// Covert photon budget and throughput over m modes.
    #[command(args_override_self = true)]
    Covert {
        #[arg(long)]
        eta: f64,
        #[arg(long = "nb")]
        n_b: f64,
        /// Total channel uses.
        #[arg(long = "m-total", value_parser = parse_count)]
        m_total: u64,
        /// Warden detection advantage bound.
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = CovertMode::All)]
        mode: CovertMode,
        /// OPA gain for opa mode.
        #[arg(long, default_value_t = ea_core::covert::DEFAULT_OPA_GAIN)]
        gain: f64,
        /// Modes per BPSK symbol for jdr mode.
        #[arg(long = "m", value_parser = parse_count, default_value_t = 100_000)]
        m_modes: u64,
    },

    /// Monte Carlo check of the analytic click probabilities.
    #[command(name = "mc-validate", args_override_self = true)]
    McValidate {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        receiver: ReceiverArgs,
        #[arg(long, value_parser = parse_count)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Collapsed)]
        sampler: SamplerArg,
        /// Bootstrap resamples for the mutual-information estimate.
        #[arg(long, value_parser = parse_count)]
        bootstrap: Option<u64>,
    },

    /// Write a built-in figure data set as CSV.
    #[command(args_override_self = true)]
    Figures {
        #[arg(value_parser = PRESET_NAMES)]
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write `<name>.json`.
        #[arg(long)]
        with_json: bool,
        /// Override the preset transmissivity.
        #[arg(long)]
        eta: Option<f64>,
        /// Override the preset thermal photon number.
        #[arg(long = "nb")]
        n_b: Option<f64>,
        /// Override the preset modes per symbol.
        #[arg(long = "m", value_parser = parse_count)]
        m_modes: Option<u64>,
    },

    /// Custom parameter sweep.
    #[command(args_override_self = true)]
    Sweep(commands::SweepArgs),
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let json = cli.json;
    match cli.command {
        Command::Capacity { channel } => commands::capacity(&channel, json),
        Command::Rate { channel, receiver } => commands::rate(&channel, &receiver, json),
        Command::Envelope {
            channel,
            m_modes,
            k_stages,
            max_order_log2,
        } => commands::envelope(&channel, m_modes, k_stages, max_order_log2, json),
        Command::Opa {
            channel,
            gain,
            m_modes,
            q_prior,
        } => commands::opa(&channel, gain, m_modes, q_prior, json),
        Command::Covert {
            eta,
            n_b,
            m_total,
            delta,
            mode,
            gain,
            m_modes,
        } => commands::covert(eta, n_b, m_total, delta, mode, gain, m_modes, json),
        Command::McValidate {
            channel,
            receiver,
            trials,
            seed,
            sampler,
            bootstrap,
        } => commands::mc_validate(&channel, &receiver, trials, seed, sampler, bootstrap, json),
        Command::Figures {
            name,
            out,
            with_json,
            eta,
            n_b,
            m_modes,
        } => commands::figures(&name, &out, with_json, eta, n_b, m_modes, json),
        Command::Sweep(args) => commands::sweep(&args, json),
    }
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("100000"), Ok(100_000));
        assert_eq!(parse_count("1e5"), Ok(100_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("x").is_err());
    }
}
