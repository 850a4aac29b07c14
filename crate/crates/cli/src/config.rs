//! Run configuration: command-line flags merged over an optional config file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use metric_entropy::{NormSpec, SpaceSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::space_arg::parse_space;

/// Flags shared by every subcommand. Each overrides the matching config
/// file key.
#[derive(Args, Clone, Debug, Default)]
pub struct GlobalArgs {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Space as shorthand (`U(4)/Gr(2)`), JSON, or a file holding either.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Schatten exponent: 1, 2, inf or any real >= 1.
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Comma-separated scales, ascending.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Root seed of every random stream; required.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: json, csv.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<String>>,
    /// Consecutive rejections before greedy packing stops.
    #[arg(long, global = true)]
    pub budget_greedy: Option<usize>,
    /// Random restarts of the kappa ascent.
    #[arg(long, global = true)]
    pub budget_kappa_restarts: Option<usize>,
    /// Monte Carlo samples of the diameter estimate.
    #[arg(long, global = true)]
    pub budget_diameter_samples: Option<usize>,
    /// Monte Carlo samples of the ball volume estimate.
    #[arg(long, global = true)]
    pub budget_volume_samples: Option<usize>,
    /// Haar probes of the covering audit.
    #[arg(long, global = true)]
    pub budget_probes: Option<usize>,
    /// Trials per verification check.
    #[arg(long, global = true)]
    pub budget_trials: Option<usize>,
}

/// Keys accepted in a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub space: Option<String>,
    pub p: Option<toml::Value>,
    pub eps: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<String>>,
    pub budget_greedy: Option<usize>,
    pub budget_kappa_restarts: Option<usize>,
    pub budget_diameter_samples: Option<usize>,
    pub budget_volume_samples: Option<usize>,
    pub budget_probes: Option<usize>,
    pub budget_trials: Option<usize>,
    pub pairs: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub suite: Option<Vec<String>>,
    pub theta: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Budgets {
    pub greedy: usize,
    pub kappa_restarts: usize,
    pub diameter_samples: usize,
    pub volume_samples: usize,
    pub probes: usize,
    pub trials: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            greedy: 5000,
            kappa_restarts: 32,
            diameter_samples: 32,
            volume_samples: 20_000,
            probes: 2000,
            trials: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Formats {
    fn parse(list: &[String]) -> CliResult<Self> {
        let mut f = Formats::default();
        for item in list {
            match item.trim().to_ascii_lowercase().as_str() {
                "json" => f.json = true,
                "csv" => f.csv = true,
                other => return Err(CliError::Input(format!("unknown format '{other}'"))),
            }
        }
        if !f.json && !f.csv {
            return Err(CliError::Input("no output format selected".into()));
        }
        Ok(f)
    }
}

/// Subcommand-specific settings that may also come from the config file.
#[derive(Clone, Debug, Default)]
pub struct CommandArgs {
    pub pairs: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub suite: Option<Vec<String>>,
    pub theta: Option<f64>,
}

/// Fully resolved configuration. Everything except the output directory is
/// embedded in the reports.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub p: NormSpec,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    pub seed: u64,
    pub budgets: Budgets,
    pub format: Formats,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

fn parse_p(value: &toml::Value) -> CliResult<NormSpec> {
    match value {
        toml::Value::Integer(i) => Ok(NormSpec::new(*i as f64)?),
        toml::Value::Float(x) => Ok(NormSpec::new(*x)?),
        toml::Value::String(s) => Ok(s.parse()?),
        other => Err(CliError::Input(format!("p must be a number or string, got {other}"))),
    }
}

impl RunConfig {
    pub fn resolve(flags: &GlobalArgs, command: CommandArgs) -> CliResult<Self> {
        let file = match &flags.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let space_text = flags
            .space
            .clone()
            .or(file.space)
            .ok_or_else(|| CliError::Input("no space given (--space)".into()))?;
        let space = parse_space(&space_text)?;
        let p = match (&flags.p, &file.p) {
            (Some(text), _) => text.parse()?,
            (None, Some(value)) => parse_p(value)?,
            (None, None) => NormSpec::OPERATOR,
        };
        let seed = flags
            .seed
            .or(file.seed)
            .ok_or_else(|| CliError::Input("a seed is required (--seed); runs are never seeded from the clock".into()))?;
        let eps = flags.eps.clone().or(file.eps).unwrap_or_default();
        if let Some(bad) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(CliError::Param(format!("epsilon values must be positive, got {bad}")));
        }
        if eps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Param("epsilon values must be strictly ascending".into()));
        }
        let defaults = Budgets::default();
        let budgets = Budgets {
            greedy: flags.budget_greedy.or(file.budget_greedy).unwrap_or(defaults.greedy),
            kappa_restarts: flags.budget_kappa_restarts.or(file.budget_kappa_restarts).unwrap_or(defaults.kappa_restarts),
            diameter_samples: flags
                .budget_diameter_samples
                .or(file.budget_diameter_samples)
                .unwrap_or(defaults.diameter_samples),
            volume_samples: flags.budget_volume_samples.or(file.budget_volume_samples).unwrap_or(defaults.volume_samples),
            probes: flags.budget_probes.or(file.budget_probes).unwrap_or(defaults.probes),
            trials: flags.budget_trials.or(file.budget_trials).unwrap_or(defaults.trials),
        };
        let format = match flags.format.clone().or(file.format) {
            Some(list) => Formats::parse(&list)?,
            None => Formats { json: true, csv: false },
        };
        Ok(RunConfig {
            space,
            p,
            eps,
            seed,
            budgets,
            format,
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            pairs: command.pairs.or(file.pairs),
            alpha: command.alpha.or(file.alpha),
            suite: command.suite.or(file.suite),
            theta: command.theta.or(file.theta),
        })
    }

    pub fn require_eps(&self) -> CliResult<&[f64]> {
        if self.eps.is_empty() {
            return Err(CliError::Input("no epsilon values given (--eps)".into()));
        }
        Ok(&self.eps)
    }
}
