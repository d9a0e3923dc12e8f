//! `qswitch`: runs one experiment from a flat config file and writes CSV/JSON
//! results plus a `run_meta.json` sidecar into the output directory.
//!
//! Exit codes: 0 success, 2 invalid config or input, 3 numerical failure,
//! 1 file i/o.

mod config;
mod experiments;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde_json::Value;

use config::{parse_config, RunConfig};
use output::{num, AppError, Object, Outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Spectrum,
    Evolve,
    Shape,
    Qudit,
    Scan,
    Capture,
    /// Whatever the config's `experiment` key names.
    Run,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Evolve => "evolve",
            Self::Shape => "shape",
            Self::Qudit => "qudit",
            Self::Scan => "scan",
            Self::Capture => "capture",
            Self::Run => "run",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qswitch", version, about = "Q-switched single-photon emission experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Threads for `scan`; other experiments are single-threaded.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    verbose: bool,
}

fn resolve(command: Command, cfg: &RunConfig) -> Result<Command, AppError> {
    let named = cfg.text("experiment");
    if command == Command::Run {
        let name = named.ok_or_else(|| AppError::Validation("`run` needs an `experiment` key".into()))?;
        return Command::from_str(name, false)
            .ok()
            .filter(|c| *c != Command::Run)
            .ok_or_else(|| AppError::Validation(format!("unknown experiment `{name}`")));
    }
    match named {
        Some(name) if name != command.name() => Err(AppError::Validation(format!(
            "subcommand `{}` conflicts with experiment = {name}",
            command.name()
        ))),
        _ => Ok(command),
    }
}

fn value_json(v: &config::Value) -> Result<Value, AppError> {
    Ok(match v {
        config::Value::Float(x) => num(*x)?,
        config::Value::List(xs) => output::nums(xs)?,
        config::Value::Int(i) => Value::from(*i),
        config::Value::Text(s) => Value::from(s.as_str()),
    })
}

fn execute(cli: &Cli) -> Result<(), AppError> {
    let started = Instant::now();
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| AppError::Validation(format!("cannot read {}: {e}", cli.config.display())))?;
    let cfg = parse_config(&text)?;
    let command = resolve(cli.command, &cfg)?;
    log::info!("running {} from {}", command.name(), cli.config.display());

    let mut out = Outputs::default();
    match command {
        Command::Spectrum => experiments::spectrum(&cfg, &mut out)?,
        Command::Evolve => experiments::evolve(&cfg, &mut out)?,
        Command::Shape => experiments::shape(&cfg, &mut out)?,
        Command::Qudit => experiments::qudit(&cfg, &mut out)?,
        Command::Scan => experiments::scan(&cfg, cli.workers.max(1), &mut out)?,
        Command::Capture => experiments::capture(&cfg, &mut out)?,
        Command::Run => unreachable!("resolved above"),
    }

    let mut echo = serde_json::Map::new();
    for (k, v) in cfg.echo() {
        echo.insert(k, value_json(&v)?);
    }
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Object::new()
        .set("experiment", command.name())
        .set("config_path", cli.config.display().to_string())
        .set("config", Value::Object(echo))
        .set("files", out.names())
        .set("workers", cli.workers)
        .set("version", env!("CARGO_PKG_VERSION"))
        .set("started_unix", stamp)
        .num("elapsed_seconds", started.elapsed().as_secs_f64())?;
    out.json("run_meta.json", &meta.into_value())?;
    for path in out.write_all(&cli.out)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qswitch: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
