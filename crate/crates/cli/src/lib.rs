//! Command-line front end: configuration, experiment orchestration and
//! report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod space_arg;
mod workers;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{CommandArgs, GlobalArgs, RunConfig};
use crate::error::{CliResult, ExitStatus};

#[derive(Parser, Debug)]
#[command(name = "metric-entropy", version, about = "Metric entropy of unitary groups and their homogeneous spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extrinsic, intrinsic and quotient distances of each pair in a file.
    Dist {
        /// JSON-lines file of {"u": matrix, "v": matrix} objects.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Dimension, kappa, theta and diameter of the space.
    Invariants {
        /// Also classify the space for this alpha in (0, 1/2].
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Audited epsilon-net at each scale.
    Net,
    /// Greedy strictly separated packing at each scale.
    Pack,
    /// Log packing number against log(1/epsilon) with a fitted slope.
    Profile,
    /// Monte Carlo Haar volume of the epsilon-ball at each scale.
    Volume,
    /// Randomized checks of the quantitative inequalities.
    Verify {
        /// Comma-separated suites, or `all`.
        #[arg(long, value_delimiter = ',')]
        suite: Option<Vec<String>>,
        /// Radius of the exponential lower-bound check.
        #[arg(long)]
        theta: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dist { .. } => "dist",
            Command::Invariants { .. } => "invariants",
            Command::Net => "net",
            Command::Pack => "pack",
            Command::Profile => "profile",
            Command::Volume => "volume",
            Command::Verify { .. } => "verify",
        }
    }

    fn args(&self) -> CommandArgs {
        match self {
            Command::Dist { pairs } => CommandArgs {
                pairs: pairs.clone(),
                ..Default::default()
            },
            Command::Invariants { alpha } => CommandArgs {
                alpha: *alpha,
                ..Default::default()
            },
            Command::Verify { suite, theta } => CommandArgs {
                suite: suite.clone(),
                theta: *theta,
                ..Default::default()
            },
            _ => CommandArgs::default(),
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let config = RunConfig::resolve(&cli.global, cli.command.args())?;
    log::info!("{} on {} with seed {}", cli.command.name(), config.space.id(), config.seed);
    match cli.command {
        Command::Dist { .. } => commands::cmd_dist(&config),
        Command::Invariants { .. } => commands::cmd_invariants(&config),
        Command::Net => commands::cmd_net(&config),
        Command::Pack => commands::cmd_pack(&config),
        Command::Profile => commands::cmd_profile(&config),
        Command::Volume => commands::cmd_volume(&config),
        Command::Verify { .. } => commands::cmd_verify(&config),
    }
}

/// Parses arguments, runs the command and returns the exit status. Messages
/// go to stderr; report paths go to stdout.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::MALFORMED_INPUT } else { ExitStatus::OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitStatus::OK
            } else {
                eprintln!("{}: a check or audit failed", cli.command.name());
                ExitStatus::CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            e.status()
        }
    }
}
