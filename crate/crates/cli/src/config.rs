//! Run settings shared by all commands.
//!
//! Settings come from command-line flags, then an optional flat TOML file
//! whose keys are the flag names (`max-iter = 2000`), then built-in
//! defaults, in that order of precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use ivcov_core::{AdmmConfig, LambdaRule, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_CV_GRID: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];
pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_REPS: usize = 10;

/// Value of `--lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LambdaMode {
    /// `0.1`
    Fixed { value: f64 },
    /// `rate:C`
    Rate { c: f64 },
    /// `scaled:C`, the rate times the mean bound variance.
    Scaled { c: f64 },
    /// `cv` or `cv:0.01,0.1,1`
    Cv { grid: Vec<f64> },
    /// `pilot`: scaled rate with `C` tuned on a pilot cell (benchmarks only).
    Pilot,
}

impl LambdaMode {
    pub fn rule(&self, folds: usize) -> Option<LambdaRule> {
        Some(match self {
            LambdaMode::Fixed { value } => LambdaRule::Fixed { value: *value },
            LambdaMode::Rate { c } => LambdaRule::Rate { c: *c },
            LambdaMode::Scaled { c } => LambdaRule::ScaledRate { c: *c },
            LambdaMode::Cv { grid } => LambdaRule::CrossValidated {
                grid: grid.clone(),
                folds,
            },
            LambdaMode::Pilot => return None,
        })
    }
}

impl FromStr for LambdaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let num = |t: &str| -> Result<f64, String> {
            t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"))
        };
        let positive = |t: &str| -> Result<f64, String> {
            let c = num(t)?;
            if c > 0.0 && c.is_finite() {
                Ok(c)
            } else {
                Err(format!("rate constant must be positive, got {c}"))
            }
        };
        if s == "pilot" {
            return Ok(LambdaMode::Pilot);
        }
        if s == "cv" {
            return Ok(LambdaMode::Cv {
                grid: DEFAULT_CV_GRID.to_vec(),
            });
        }
        if let Some(rest) = s.strip_prefix("cv:") {
            let grid = rest.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            if grid.is_empty() || grid.iter().any(|g| !(*g >= 0.0)) {
                return Err("cv grid values must be nonnegative".into());
            }
            return Ok(LambdaMode::Cv { grid });
        }
        if let Some(rest) = s.strip_prefix("rate:") {
            return Ok(LambdaMode::Rate { c: positive(rest)? });
        }
        if let Some(rest) = s.strip_prefix("scaled:") {
            return Ok(LambdaMode::Scaled { c: positive(rest)? });
        }
        let value = num(s).map_err(|_| format!("expected a number, rate:C, scaled:C, cv[:grid] or pilot, got {s:?}"))?;
        if !(value >= 0.0) || !value.is_finite() {
            return Err(format!("lambda must be nonnegative, got {value}"));
        }
        Ok(LambdaMode::Fixed { value })
    }
}

impl fmt::Display for LambdaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaMode::Fixed { value } => write!(f, "{value}"),
            LambdaMode::Rate { c } => write!(f, "rate:{c}"),
            LambdaMode::Scaled { c } => write!(f, "scaled:{c}"),
            LambdaMode::Cv { grid } => {
                let g: Vec<String> = grid.iter().map(|v| v.to_string()).collect();
                write!(f, "cv:{}", g.join(","))
            }
            LambdaMode::Pilot => f.write_str("pilot"),
        }
    }
}

/// Flags accepted by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Base seed for all random streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat TOML file with default values for these flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for benchmarks.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Penalty: a number, rate:C, scaled:C, cv, cv:g1,g2,... or pilot.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<LambdaMode>,
    /// Cross-validation folds for --lambda cv.
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Absolute stopping tolerance for both the primal residual and the
    /// iterate change (default 1e-7 times the dimension).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Replications per benchmark cell.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    lambda: Option<toml::Value>,
    folds: Option<usize>,
    epsilon: Option<f64>,
    beta: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    reps: Option<usize>,
}

/// Resolved settings, echoed into every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
    /// `None` when the command picks its own default.
    pub lambda: Option<LambdaMode>,
    pub folds: usize,
    pub reps: usize,
    pub admm: AdmmConfig,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let file_lambda = match file.lambda {
            None => None,
            Some(toml::Value::String(s)) => Some(s.parse::<LambdaMode>().map_err(CliError::Usage)?),
            Some(toml::Value::Float(v)) => Some(v.to_string().parse::<LambdaMode>().map_err(CliError::Usage)?),
            Some(toml::Value::Integer(v)) => Some(v.to_string().parse::<LambdaMode>().map_err(CliError::Usage)?),
            Some(other) => return Err(CliError::usage(format!("config key lambda: unsupported value {other}"))),
        };

        let defaults = AdmmConfig::default();
        let tol = args.tol.or(file.tol);
        let admm = AdmmConfig {
            lambda: 0.0,
            beta: args.beta.or(file.beta).unwrap_or(defaults.beta),
            epsilon: args.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
            tol_primal: tol.map_or(defaults.tol_primal, Tolerance::Absolute),
            tol_change: tol.map_or(defaults.tol_change, Tolerance::Absolute),
            max_iter: args.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
            seed: 0,
        };
        admm.validate().map_err(|e| CliError::usage(e.to_string()))?;

        let workers = args
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(CliError::usage("--workers must be at least 1"));
        }
        let folds = args.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
        if folds < 2 {
            return Err(CliError::usage("--folds must be at least 2"));
        }
        let reps = args.reps.or(file.reps).unwrap_or(DEFAULT_REPS);
        if reps == 0 {
            return Err(CliError::usage("--reps must be at least 1"));
        }
        let seed = args.seed.or(file.seed).unwrap_or(0);
        Ok(Self {
            seed,
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            workers,
            lambda: args.lambda.clone().or(file_lambda),
            folds,
            reps,
            admm: AdmmConfig { seed, ..admm },
        })
    }

    /// The λ rule for single-data-set commands; `pilot` is rejected there.
    pub fn single_rule(&self) -> CliResult<LambdaRule> {
        match &self.lambda {
            None => Ok(LambdaRule::Fixed { value: 0.0 }),
            Some(mode) => mode
                .rule(self.folds)
                .ok_or_else(|| CliError::usage("--lambda pilot is only available for bench")),
        }
    }
}

fn read_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}
