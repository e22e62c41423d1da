//! Run configuration: a JSON file, command-line flags, or both.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use preq::calibration::BinSpec;
use preq::experiments::ExperimentSpec;
use preq::forecasters::ForecasterSpec;
use preq::processes::ProcessKind;
use preq::report::{Criterion, ZTest};
use preq::rule::{default_h_family, RuleKind, SelectionRule};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_confidence() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Simulate {
        process: ProcessKind,
        n: usize,
        #[serde(default)]
        forecaster: Option<ForecasterSpec>,
        #[serde(default)]
        rules: Vec<SelectionRule>,
    },
    Forecast {
        run: PathBuf,
        forecaster: ForecasterSpec,
        #[serde(default)]
        rules: Vec<SelectionRule>,
    },
    Evaluate {
        run: PathBuf,
        #[serde(default)]
        rules: Vec<SelectionRule>,
        /// All applicable criteria when absent.
        #[serde(default)]
        criteria: Option<Vec<Criterion>>,
        #[serde(default)]
        bins: BinSpec,
        #[serde(default)]
        test: ZTest,
    },
    Adversary {
        forecaster: ForecasterSpec,
        n: usize,
    },
    Experiment {
        experiment: ExperimentSpec,
    },
    Wilson {
        #[serde(default)]
        phat: Option<f64>,
        #[serde(default)]
        n: Option<u64>,
        #[serde(default = "default_confidence")]
        conf: f64,
        /// Emit the four-row card-game table instead of a single interval.
        #[serde(default)]
        table: bool,
    },
    Replay {
        run: PathBuf,
        #[serde(default)]
        rules: Vec<SelectionRule>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Forecast { .. } => "forecast",
            Command::Evaluate { .. } => "evaluate",
            Command::Adversary { .. } => "adversary",
            Command::Experiment { .. } => "experiment",
            Command::Wilson { .. } => "wilson",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    /// Directory for artifact files; nothing is written when absent.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Top-level seed. Simulation and the adversary use it directly;
    /// experiments have their seeds replaced by ones derived from it.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self { command, out: None, format: Format::default(), seed: None }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        parse_json("config", text)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&crate::read_input(path)?)
    }
}

#[derive(Debug, Parser)]
#[command(name = "preq", version, about = "Prequential calibration workbench")]
pub struct Cli {
    /// JSON run configuration; replaces the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    /// JSON array of rules, or a comma list of: all, odd_steps, even_steps,
    /// previous_0, previous_1, default.
    #[arg(long)]
    pub rules: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Generate an outcome sequence, optionally with forecasts.
    Simulate {
        /// Process as JSON, e.g. '{"kind":"bernoulli","p":0.3}'.
        #[arg(long)]
        process: String,
        #[arg(long)]
        n: usize,
        /// Forecaster as JSON, e.g. '{"kind":"laplace"}'.
        #[arg(long)]
        forecaster: Option<String>,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Run a forecaster over a stored run.
    Forecast {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        forecaster: String,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Calibration reports for a stored run.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[command(flatten)]
        rules: RuleArgs,
        /// Comma list of overall, probability, subset, h_based.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
        #[arg(long, default_value_t = 0.05)]
        bin_width: f64,
        #[arg(long, default_value_t = 30)]
        m_min: u64,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
    },
    /// Build outcomes that defeat an H-based forecaster.
    Adversary {
        #[arg(long)]
        forecaster: String,
        #[arg(long)]
        n: usize,
    },
    /// Run an experiment given as JSON.
    Experiment {
        #[arg(long)]
        spec: String,
    },
    /// Wilson score interval for a binomial proportion.
    Wilson {
        #[arg(long)]
        phat: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 0.95)]
        conf: f64,
        /// The card-game table: 0.75 at n = 10000, 1000, 100, 1.
        #[arg(long)]
        table: bool,
    },
    /// Regenerate a stored run from its spec and seed and compare.
    Replay {
        run: PathBuf,
        #[command(flatten)]
        rules: RuleArgs,
    },
}

pub(crate) fn parse_json<T: DeserializeOwned>(what: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|source| CliError::Parse { what: what.to_string(), source })
}

/// Parses `--rules`: a JSON array, or a comma list of shorthand names.
pub fn parse_rules(text: &str) -> Result<Vec<SelectionRule>, CliError> {
    let text = text.trim();
    if text.starts_with('[') {
        return parse_json("rules", text);
    }
    let mut rules = Vec::new();
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "all" => rules.push(SelectionRule::all()),
            "odd_steps" => rules.push(SelectionRule::odd_steps()),
            "even_steps" => rules.push(SelectionRule::new("even_steps", RuleKind::EveryMth { m: 2, offset: 0 })),
            "previous_0" => rules.push(SelectionRule::previous_outcome(0)),
            "previous_1" => rules.push(SelectionRule::previous_outcome(1)),
            "default" => rules.extend(default_h_family(None)),
            other => return Err(CliError::Usage(format!("unknown rule shorthand `{other}`"))),
        }
    }
    Ok(rules)
}

fn rules_arg(args: RuleArgs) -> Result<Vec<SelectionRule>, CliError> {
    args.rules.as_deref().map(parse_rules).transpose().map(Option::unwrap_or_default)
}

fn parse_criterion(name: &str) -> Result<Criterion, CliError> {
    serde_json::from_value(serde_json::Value::String(name.trim().to_string()))
        .map_err(|_| CliError::Usage(format!("unknown criterion `{name}`")))
}

impl CliCommand {
    pub fn name(&self) -> &'static str {
        match self {
            CliCommand::Simulate { .. } => "simulate",
            CliCommand::Forecast { .. } => "forecast",
            CliCommand::Evaluate { .. } => "evaluate",
            CliCommand::Adversary { .. } => "adversary",
            CliCommand::Experiment { .. } => "experiment",
            CliCommand::Wilson { .. } => "wilson",
            CliCommand::Replay { .. } => "replay",
        }
    }

    pub fn into_command(self) -> Result<Command, CliError> {
        Ok(match self {
            CliCommand::Simulate { process, n, forecaster, rules } => Command::Simulate {
                process: parse_json("process", &process)?,
                n,
                forecaster: forecaster.as_deref().map(|f| parse_json("forecaster", f)).transpose()?,
                rules: rules_arg(rules)?,
            },
            CliCommand::Forecast { run, forecaster, rules } => {
                Command::Forecast { run, forecaster: parse_json("forecaster", &forecaster)?, rules: rules_arg(rules)? }
            }
            CliCommand::Evaluate { run, rules, criteria, bin_width, m_min, significance } => Command::Evaluate {
                run,
                rules: rules_arg(rules)?,
                criteria: criteria.map(|c| c.iter().map(|s| parse_criterion(s)).collect()).transpose()?,
                bins: BinSpec { width: bin_width, m_min },
                test: ZTest { significance, m_min },
            },
            CliCommand::Adversary { forecaster, n } => {
                Command::Adversary { forecaster: parse_json("forecaster", &forecaster)?, n }
            }
            CliCommand::Experiment { spec } => Command::Experiment { experiment: parse_json("experiment", &spec)? },
            CliCommand::Wilson { phat, n, conf, table } => Command::Wilson { phat, n, conf, table },
            CliCommand::Replay { run, rules } => Command::Replay { run, rules: rules_arg(rules)? },
        })
    }
}

impl Cli {
    /// Merges the config file (if any) with the subcommand and global flags;
    /// flags win over the file.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut config = match (self.config, self.command) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either --config or a subcommand, not both".into()));
            }
            (Some(path), None) => RunConfig::load(&path)?,
            (None, Some(command)) => RunConfig::new(command.into_command()?),
            (None, None) => return Err(CliError::Usage("no command given; see --help".into())),
        };
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        if self.out.is_some() {
            config.out = self.out;
        }
        if let Some(format) = self.format {
            config.format = format;
        }
        Ok(config)
    }
}
