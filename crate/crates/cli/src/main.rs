//! `rieszlab`: criteria checks, spectral diagnostics and parameter sweeps.
//!
//! Exit codes: 0 holds / ok, 1 fails, 2 inconclusive, 64 malformed config or
//! arguments, 70 numerical failure (eigensolver), 74 i/o error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use output::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "rieszlab",
    version,
    about = "Riesz-basis criteria and spectral diagnostics for T = A + V"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the criteria (exit 0 holds, 1 fails, 2 inconclusive).
    Check {
        #[command(flatten)]
        common: Common,
        /// Count the fast-route verdicts towards the exit code.
        #[arg(long)]
        fast_route: bool,
    },
    /// Eigensystem, projections, Riesz sums and condition numbers of a truncation.
    Spectral {
        #[command(flatten)]
        common: Common,
    },
    /// Decay curves over a grid of scenario parameters.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid axis, repeatable (at most two): K=V1,V2,...
        #[arg(long = "grid", value_name = "K=V1,V2", value_parser = parse_grid)]
        grid: Vec<(String, Vec<String>)>,
    },
    /// List the registered scenarios and their parameters.
    ScenarioList,
}

#[derive(Args)]
struct Common {
    /// Config file (TOML with dotted keys).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run directory for the config echo, CSVs and summary.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Scenario parameter, repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_kv)]
    params: Vec<(String, String)>,
    #[arg(long, value_name = "N")]
    quad_nodes: Option<usize>,
    #[arg(long, value_name = "N")]
    size: Option<usize>,
    #[arg(long, value_name = "X")]
    epsilon: Option<f64>,
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected K=V, got {s:?}"))?;
    if k.trim().is_empty() {
        return Err(format!("empty key in {s:?}"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_grid(s: &str) -> Result<(String, Vec<String>), String> {
    let (k, v) = parse_kv(s)?;
    let vals = v
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect();
    Ok((k, vals))
}

fn load(
    common: &Common,
    fast_route: bool,
    grid: Vec<(String, Vec<String>)>,
) -> CliResult<RunConfig> {
    let text = match &common.config {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let o = Overrides {
        scenario: common.scenario.clone(),
        params: common.params.clone(),
        grid,
        seed: common.seed,
        size: common.size,
        quad_nodes: common.quad_nodes,
        epsilon: common.epsilon,
        fast_route,
        out: common.out.clone(),
    };
    Ok(RunConfig::load(&text, &o)?)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.cmd {
        Cmd::Check { common, fast_route } => {
            commands::cmd_check(&load(&common, fast_route, Vec::new())?)
        }
        Cmd::Spectral { common } => commands::cmd_spectral(&load(&common, false, Vec::new())?),
        Cmd::Sweep { common, grid } => commands::cmd_sweep(&load(&common, false, grid)?),
        Cmd::ScenarioList => Ok(commands::cmd_scenario_list()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code (2) would collide with "inconclusive"
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rieszlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
