//! `liouville-lab`: command-line front end to the verification library.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use commands::{CliError, Outcome};
use config::{parse_format, Format, RunConfig, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "liouville-lab", version, about = "Numerical checks for Liouville-type equations, Bol's inequality and the sphere covering inequality")]
struct Cli {
    /// Config file (`key = value` lines); defaults to $LIOUVILLE_LAB_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: json or csv.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    #[arg(long, global = true)]
    quadrature_tol: Option<f64>,
    #[arg(long, global = true)]
    ode_tol: Option<f64>,
    #[arg(long, global = true)]
    grid_nodes: Option<usize>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    #[command(subcommand)]
    command: commands::Command,
}

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a str,
    inputs: serde_json::Value,
    payload: serde_json::Value,
    wall_time: f64,
    version: &'static str,
    config_hash: String,
    config: &'a RunConfig,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.format {
        cfg.output_format = Some(v);
    }
    if let Some(v) = &cli.output {
        cfg.output_path = Some(v.clone());
    }
    if let Some(v) = cli.parallelism {
        cfg.parallelism = v;
    }
    if let Some(v) = cli.quadrature_tol {
        cfg.quadrature_tol = v;
    }
    if let Some(v) = cli.ode_tol {
        cfg.ode_tol = v;
    }
    if let Some(v) = cli.grid_nodes {
        cfg.grid_nodes = v;
    }
    if let Some(v) = cli.r_max {
        cfg.r_max = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_to(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = effective_config(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let name = cli.command.name();
    let Outcome { payload, csv } = pool.install(|| cli.command.execute(&cfg))?;
    let wall_time = start.elapsed().as_secs_f64();
    let format = cfg.output_format.unwrap_or_else(|| cli.command.default_format());
    let report = RunReport {
        command: name,
        inputs: serde_json::to_value(&cli.command).expect("inputs serialize"),
        payload,
        wall_time,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        config: &cfg,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match format {
        Format::Json => write_to(&cfg.output_path, &json),
        Format::Csv => {
            let csv = csv.ok_or_else(|| CliError::Usage(format!("`{name}` has no CSV output")))?;
            write_to(&cfg.output_path, &csv)?;
            if cfg.output_path.is_some() {
                write_to(&None, &json)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
