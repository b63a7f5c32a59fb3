use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hcv_cli::commands::{self, SimulateOptions};
use hcv_cli::{CliError, MethodKind, Status};
use hcv_dynamics::Target;

/// Within-host HCV model: analysis, simulation, stability certificates and sweeps.
///
/// Exit codes: 0 ok, 1 usage or validation error, 2 violation found,
/// 3 hypotheses not met (advisory), 4 I/O or integration failure.
#[derive(Parser)]
#[command(name = "hcvdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario or sweep file and check parameter constraints.
    Validate { file: PathBuf },
    /// Equilibria, R0, existence regime and local stability.
    Analyze {
        file: PathBuf,
        /// Print a flat `key = value` block instead of the report.
        #[arg(long)]
        machine: bool,
    },
    /// Integrate the scenario and write `t,T,I,V` CSV.
    Simulate {
        file: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one SVG per variable next to the CSV.
        #[arg(long)]
        svg: bool,
        #[arg(long = "t-end", value_name = "DAYS")]
        t_end: Option<f64>,
        #[arg(long, value_parser = parse_method)]
        method: Option<MethodKind>,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
    },
    /// Sample the Lyapunov derivative for a global-stability statement.
    Certify {
        file: PathBuf,
        #[arg(long, default_value = "E0", value_parser = parse_target)]
        target: Target,
        /// Points per axis of the log-uniform grid.
        #[arg(long, default_value_t = 20, value_name = "N")]
        grid: usize,
        #[arg(long)]
        machine: bool,
    },
    /// Evaluate outputs over a one- or two-axis parameter grid.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<MethodKind, String> {
    s.parse()
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: hcv_dynamics::Error| e.to_string())
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    let status = match cli.command {
        Command::Validate { file } => commands::validate(&file, &mut out),
        Command::Analyze { file, machine } => commands::analyze(&commands::load_scenario(&file)?, machine, &mut out),
        Command::Simulate {
            file,
            out: csv,
            svg,
            t_end,
            method,
            width,
            height,
        } => {
            let opts = SimulateOptions {
                out: csv,
                svg,
                t_end,
                method,
                width,
                height,
            };
            commands::simulate(&commands::load_scenario(&file)?, &opts, &mut out, &mut err)
        }
        Command::Certify {
            file,
            target,
            grid,
            machine,
        } => commands::certify(&commands::load_scenario(&file)?, target, grid, machine, &mut out),
        Command::Sweep { file, out: csv } => commands::sweep(&commands::load_sweep(&file)?, csv.as_deref(), &mut out),
    };
    let _ = out.flush();
    status
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
