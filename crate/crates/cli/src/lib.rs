//! Command-line front end: scenario files in, CSV and JSON out.
//!
//! Exit codes: 0 success, 1 input error, 2 constraint violation,
//! 3 verification failure.

pub mod commands;
pub mod io;
pub mod scenario;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use sta_core::timing::{Constraint, SweepMode};

use commands::{DoubleWellArgs, ProtocolKind, VerifyArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONSTRAINT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<sta_core::Error> for CliError {
    fn from(e: sta_core::Error) -> Self {
        use sta_core::Error::*;
        let code = match e {
            NormDrift(_) | FrameMismatch(_) => EXIT_VERIFY,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sta", version, about = "Design and verify invariant-based trap protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConstraintArg {
    Freq,
    #[value(name = "box")]
    TrapBox,
    Both,
}

impl From<ConstraintArg> for Constraint {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::Freq => Constraint::RealFrequency,
            ConstraintArg::TrapBox => Constraint::Box,
            ConstraintArg::Both => Constraint::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProtocolArg {
    Dual,
    Sequential,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetArg {
    Fig3,
    Fig4,
}

impl PresetArg {
    fn name(self) -> &'static str {
        match self {
            PresetArg::Fig3 => "fig3",
            PresetArg::Fig4 => "fig4",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the controls of a scenario and check its constraints.
    Design {
        scenario: PathBuf,
        /// Control CSV; a JSON report is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Shortest duration meeting the constraints.
    Mintime {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ConstraintArg::Both)]
        constraint: ConstraintArg,
        #[arg(long, value_enum, default_value_t = ProtocolArg::Dual)]
        protocol: ProtocolArg,
        #[arg(long)]
        json: bool,
    },
    /// Propagate invariant eigenstates through the protocol.
    Verify {
        scenario: PathBuf,
        /// Level index or comma-separated list, e.g. "0,1".
        #[arg(long, default_value = "0")]
        state: String,
        /// Read controls from a CSV written by `design`.
        #[arg(long)]
        controls: Option<PathBuf>,
        /// JSON statistics.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final wavefunctions as CSV.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long, default_value_t = 0.999)]
        threshold: f64,
        /// Largest probability allowed near the grid edges.
        #[arg(long, default_value_t = 1e-6)]
        max_boundary: f64,
    },
    /// Exceeded-distance ratio over a range of durations.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ProtocolArg::Dual)]
        mode: ProtocolArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Differential launch from a biased double well.
    Doublewell {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also propagate the well states and compare.
        #[arg(long)]
        simulate: bool,
        /// Largest relative deviation accepted with --simulate.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("STA_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("STA_THREADS: {value:?} is not a positive integer")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Design { scenario, out } => commands::design(&scenario, &out),
        Command::Mintime {
            scenario,
            constraint,
            protocol,
            json,
        } => {
            let kind = match protocol {
                ProtocolArg::Dual => ProtocolKind::Dual,
                ProtocolArg::Sequential => ProtocolKind::Sequential,
            };
            commands::mintime(&scenario, constraint.into(), kind, json)
        }
        Command::Verify {
            scenario,
            state,
            controls,
            out,
            snapshots,
            threshold,
            max_boundary,
        } => commands::verify(VerifyArgs {
            scenario: &scenario,
            state: &state,
            controls: controls.as_deref(),
            out: out.as_deref(),
            snapshots: snapshots.as_deref(),
            threshold,
            max_boundary,
        }),
        Command::Sweep { scenario, mode, out } => {
            let mode = match mode {
                ProtocolArg::Dual => SweepMode::Dual,
                ProtocolArg::Sequential => SweepMode::Sequential,
            };
            commands::sweep(&scenario, mode, &out)
        }
        Command::Doublewell {
            scenario,
            preset,
            out,
            simulate,
            tolerance,
        } => commands::doublewell(DoubleWellArgs {
            scenario: &scenario,
            preset: preset.map(PresetArg::name),
            out: &out,
            simulate,
            tolerance,
        }),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
