//! `nfcav`: mode summaries, emission-rate sweeps, decay traces, single-mode
//! parameters and figure data for a nanofiber inside an FBG cavity.
//!
//! Exit codes: 0 success, 1 i/o, 2 configuration, 3 solver, 4 integrator.

mod commands;
mod config;
mod error;
mod figures;
mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Sweep, SweepParam};
use config::{Format, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nfcav", version, about = "Atom near a nanofiber in a fiber-Bragg-grating cavity")]
struct Cli {
    /// Key-value configuration file (`fiber.radius_nm = 200`, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Override one configuration key, e.g. `--set cavity.L_m=0.1`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Guided-mode summary, or its radial profile.
    Modes {
        /// Number of radial samples of |e_r|, |e_phi|, |e_z|.
        #[arg(long)]
        profile_points: Option<usize>,
        #[arg(long, default_value_t = 1000.0)]
        r_max_nm: f64,
    },
    /// Overdamped-cavity emission rates, optionally swept over one parameter.
    Rates {
        #[arg(long, value_parser = ["a", "r", "z", "R2"])]
        sweep: Option<String>,
        #[arg(long, requires = "sweep")]
        from: Option<f64>,
        #[arg(long, requires = "sweep")]
        to: Option<f64>,
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Upper-state amplitude from the delay-differential equation.
    Decay,
    /// Single-mode reduction: coupling, damping, critical lengths, regime.
    Singlemode {
        /// Ratio standing in for "much greater than" when naming the regime.
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
    },
    /// Data series of a published figure panel.
    Figure {
        /// One of 2a..7b, 8a, 8b, 9a, 9b, 10a..10f, 11.
        id: String,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for kv in &cli.sets {
        cfg.assign(kv)?;
    }
    if let Some(f) = &cli.format {
        cfg.output_format = f.parse::<Format>().map_err(|e| CliError::config("--format", e))?;
    }
    if let Some(p) = &cli.out {
        cfg.output_path = Some(p.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_of(sweep: &Option<String>, from: Option<f64>, to: Option<f64>, points: usize) -> Result<Option<Sweep>, CliError> {
    let Some(name) = sweep else {
        return Ok(None);
    };
    let param: SweepParam = name.parse().map_err(|e: String| CliError::config("--sweep", e))?;
    let from = from.ok_or_else(|| CliError::config("--from", "required with --sweep"))?;
    let to = to.ok_or_else(|| CliError::config("--to", "required with --sweep"))?;
    let s = Sweep { param, from, to, points };
    s.validate()?;
    Ok(Some(s))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let table = match &cli.command {
        Command::Modes {
            profile_points,
            r_max_nm,
        } => commands::modes(&cfg, profile_points.map(|n| (n, *r_max_nm)))?,
        Command::Rates {
            sweep,
            from,
            to,
            points,
        } => commands::rates(&cfg, sweep_of(sweep, *from, *to, *points)?)?,
        Command::Decay => commands::decay(&cfg)?,
        Command::Singlemode { threshold } => commands::singlemode(&cfg, *threshold)?,
        Command::Figure { id } => figures::figure(id, &cfg)?,
    };
    let text = table.render(cfg.output_format, cfg.output_precision);
    match &cfg.output_path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nfcav: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
