//! Seeded verification campaigns behind the `austere-lab` binary.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use austere_core::Field;
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

mod campaigns;
mod input;

pub use input::{load_matrix, parse_matrix_arg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] austere_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Core(austere_core::Error::Domain(_) | austere_core::Error::Parse(_)) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Austere,
    FlatNormal,
    Dupin,
    Reducibility,
    Brackets,
    C4,
    Subspace,
    Bound,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub structural: f64,
    /// Pairing residuals and normal commutators.
    pub spectral: f64,
    /// Variation of principal curvatures along curvature circles.
    pub circle: f64,
    /// Relative gap between bracket closed forms and flow estimates.
    pub bracket: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: austere_core::tol::STRUCTURAL,
            spectral: austere_core::tol::PAIRING,
            circle: 1e-9,
            bracket: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub field: Field,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Inline `diag:...` shorthand or a path to a matrix JSON file.
    pub matrix: Option<String>,
    /// Path to a subspace JSON file.
    pub subspace: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            n: 4,
            field: Field::Real,
            trials: 20,
            seed: 0,
            tolerances: Tolerances::default(),
            output_path: None,
            format: Format::Json,
            matrix: None,
            subspace: None,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        if !(2..=12).contains(&self.n) {
            return Err(usage(format!("--n must lie in 2..=12, got {}", self.n)));
        }
        let t = &self.tolerances;
        if [t.structural, t.spectral, t.circle, t.bracket]
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(usage("tolerances must be positive and finite"));
        }
        Ok(())
    }
}

/// Every field optional; a config file fills what the flags leave open.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub field: Option<Field>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tolerances: Option<Tolerances>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub matrix: Option<String>,
    pub subspace: Option<PathBuf>,
}

fn parse_field(s: &str) -> Result<Field, String> {
    Field::from_code(s).ok_or_else(|| format!("unknown field {s:?}, expected R, C or H"))
}

#[derive(Debug, Parser)]
#[command(name = "austere-lab", version, about = "Verification campaigns for austere submanifolds")]
pub struct Args {
    /// Campaign to run.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_field)]
    pub field: Option<Field>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Root seed; falls back to the config file, then AUSTERE_LAB_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol_structural: Option<f64>,
    #[arg(long)]
    pub tol_spectral: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `diag:3,-3,1,-1/sqrt20` or a matrix JSON file.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Subspace JSON file for the subspace campaign.
    #[arg(long)]
    pub subspace: Option<PathBuf>,
}

impl Args {
    /// Merges flags over the config file over defaults. `env_seed` is the
    /// value of `AUSTERE_LAB_SEED`, if set.
    pub fn resolve(self, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => serde_json::from_str::<ConfigFile>(&std::fs::read_to_string(path)?)
                .map_err(|e| usage(format!("config {}: {e}", path.display())))?,
            None => ConfigFile::default(),
        };
        let command = self
            .command
            .or(file.command)
            .ok_or_else(|| usage("no command given"))?;
        let env_seed = env_seed
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("AUSTERE_LAB_SEED={s:?} is not an integer")))
            })
            .transpose()?;
        let mut cfg = RunConfig::new(command);
        cfg.n = self.n.or(file.n).unwrap_or(cfg.n);
        cfg.field = self.field.or(file.field).unwrap_or(cfg.field);
        cfg.trials = self.trials.or(file.trials).unwrap_or(cfg.trials);
        cfg.seed = self.seed.or(file.seed).or(env_seed).unwrap_or(0);
        cfg.tolerances = file.tolerances.unwrap_or_default();
        if let Some(t) = self.tol_structural {
            cfg.tolerances.structural = t;
        }
        if let Some(t) = self.tol_spectral {
            cfg.tolerances.spectral = t;
        }
        cfg.output_path = self.out.or(file.out);
        cfg.format = self.format.or(file.format).unwrap_or_default();
        cfg.matrix = self.matrix.or(file.matrix);
        cfg.subspace = self.subspace.or(file.subspace);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub tolerance: Option<f64>,
    pub measured: BTreeMap<String, Value>,
}

impl Check {
    pub(crate) fn new(name: impl Into<String>, passed: bool, tolerance: Option<f64>) -> Self {
        Check {
            name: name.into(),
            passed,
            tolerance,
            measured: BTreeMap::new(),
        }
    }

    pub(crate) fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.measured
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut out = String::from("check,passed,tolerance,key,value\n");
                for c in &self.checks {
                    let tol = c.tolerance.map(|t| format!("{t:e}")).unwrap_or_default();
                    for (k, v) in &c.measured {
                        let v = match v {
                            Value::Array(items) => items
                                .iter()
                                .map(|x| x.to_string())
                                .collect::<Vec<_>>()
                                .join(";"),
                            other => other.to_string(),
                        };
                        out.push_str(&format!("{},{},{},{},{}\n", c.name, c.passed, tol, k, v.replace(',', ";")));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Seed of trial `index`, independent of scheduling.
pub fn seed_for(root: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let start = Instant::now();
    let checks = campaigns::dispatch(config)?;
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command,
        config: config.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
