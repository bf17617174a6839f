use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};

use infusim_cli::commands::{
    cmd_bode, cmd_compare, cmd_simulate, cmd_sweep, cmd_tune, parse_params,
};
use infusim_cli::config::RunConfig;
use infusim_cli::CliError;
use infusim_core::frac::FopidClass;

/// Closed-loop drug infusion simulation and PID/FOPID autotuning.
///
/// Times are minutes, frequencies rad/min. Every run writes a
/// manifest.toml; re-running the same subcommand with that manifest as
/// --config reproduces the data files bit-identically.
#[derive(Parser)]
#[command(name = "infusim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one closed loop and export trace, metrics, and plots.
    Simulate {
        /// TOML run configuration (defaults apply when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Controller gains "Kp,Ki,Kd" or "Kp,Ki,Kd,lambda,mu".
        #[arg(long)]
        params: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured swarm seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tune one controller class with the swarm optimizer.
    Tune {
        #[arg(long)]
        config: Option<PathBuf>,
        /// PID | FOPID1 | FOPID2 | FOPID3 | FOPID4 | ALL.
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tune all five classes and emit the comparison table.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Robustness sweep of a fixed controller over brain-gain factors.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Frequency response of the rationalized fractional operator.
    Bode {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Exponent of s, strictly inside (-1, 1).
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: Option<&PathBuf>, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(config.map(|p| p.as_path()))?;
    if let Some(seed) = seed {
        cfg.swarm.seed = seed;
    }
    Ok(cfg)
}

fn class_arg(arg: Option<String>, cfg: &RunConfig) -> Result<String, CliError> {
    arg.or_else(|| cfg.run.class.clone())
        .ok_or_else(|| CliError::Config("--class is required (or a manifest [run].class)".into()))
}

fn params_arg(arg: Option<String>, cfg: &RunConfig) -> Result<String, CliError> {
    arg.or_else(|| cfg.run.params.clone())
        .ok_or_else(|| CliError::Config("--params is required (or a manifest [run].params)".into()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            params,
            out,
            seed,
        } => {
            let mut cfg = load(config.as_ref(), seed)?;
            let params_text = params_arg(params, &cfg)?;
            let params = parse_params(&params_text)?;
            cfg.run.params = Some(params_text);
            cmd_simulate(&cfg, &params, &out)
        }
        Command::Tune {
            config,
            class,
            out,
            seed,
        } => {
            let mut cfg = load(config.as_ref(), seed)?;
            let class_text = class_arg(class, &cfg)?;
            cfg.run.class = Some(class_text.clone());
            if class_text.eq_ignore_ascii_case("all") {
                return cmd_compare(&cfg, &out);
            }
            let class = FopidClass::parse(&class_text).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown class {class_text}; expected PID, FOPID1..FOPID4, or ALL"
                ))
            })?;
            cmd_tune(&cfg, class, &out)
        }
        Command::Compare { config, out, seed } => {
            let cfg = load(config.as_ref(), seed)?;
            cmd_compare(&cfg, &out)
        }
        Command::Sweep {
            config,
            params,
            out,
            seed,
        } => {
            let mut cfg = load(config.as_ref(), seed)?;
            let params_text = params_arg(params, &cfg)?;
            let params = parse_params(&params_text)?;
            cfg.run.params = Some(params_text);
            cmd_sweep(&cfg, &params, &out)
        }
        Command::Bode { config, gamma, out } => {
            let mut cfg = load(config.as_ref(), None)?;
            let gamma = gamma.or(cfg.run.gamma).unwrap_or(cfg.bode.gamma);
            cfg.run.gamma = Some(gamma);
            cmd_bode(&cfg, gamma, &out)
        }
    }
}

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                exit(1);
            }
            print!("{e}");
            exit(0);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
}
