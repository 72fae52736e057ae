//! Run configuration: a JSON file overridden by flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use shapeinv::models::ModelParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Kinetic,
    Oscillator,
    Morse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Model family
    #[arg(long, value_enum, global = true)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Morse depth parameter D
    #[arg(long = "D", global = true)]
    pub depth: Option<f64>,
    /// Morse well depth V0 (alternative to --D)
    #[arg(long = "V0", global = true, conflicts_with = "depth")]
    pub v0: Option<f64>,
    /// Morse basis parameter
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Radial basis scale
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Angular momentum
    #[arg(long, global = true)]
    pub l: Option<u32>,
    /// JSON run configuration; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Truncation order [default: 60]
    #[arg(short = 'N', global = true)]
    pub n: Option<usize>,
    /// [default: 1e-8]
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<ModelParams>,
    #[serde(rename = "N")]
    n: Option<usize>,
    tolerance: Option<f64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Option<ModelParams>,
    pub n: usize,
    pub tolerance: f64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let n = args.n.or(file.n).unwrap_or(60);
        if n < 4 {
            return Err(CliError::Config(format!("truncation N must be at least 4, got {n}")));
        }
        let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-8);
        if !(tolerance > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tolerance}")));
        }
        let model = resolve_model(args, file.model)?;
        if let Some(p) = &model {
            p.validate()?;
        }
        Ok(Self {
            model,
            n,
            tolerance,
            format: args.format.or(file.format),
            out: args.out.clone().or(file.out),
        })
    }

    pub fn require_model(&self) -> Result<ModelParams, CliError> {
        self.model
            .ok_or_else(|| CliError::Config("no model given: use --model or a config file".into()))
    }
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn kind_of(p: &ModelParams) -> ModelKind {
    match p {
        ModelParams::Kinetic { .. } => ModelKind::Kinetic,
        ModelParams::Oscillator { .. } => ModelKind::Oscillator,
        ModelParams::Morse { .. } => ModelKind::Morse,
    }
}

fn reject(flag: &str, value: Option<impl Sized>, model: &str) -> Result<(), CliError> {
    match value {
        Some(_) => Err(CliError::Config(format!("--{flag} does not apply to the {model} model"))),
        None => Ok(()),
    }
}

fn resolve_model(args: &CommonArgs, from_file: Option<ModelParams>) -> Result<Option<ModelParams>, CliError> {
    let base = match (args.model, from_file) {
        (Some(kind), Some(p)) if kind == kind_of(&p) => p,
        (Some(kind), _) => defaults(kind),
        (None, Some(p)) => p,
        (None, None) => {
            let any_flag = args.omega.is_some()
                || args.alpha.is_some()
                || args.depth.is_some()
                || args.v0.is_some()
                || args.gamma.is_some()
                || args.lambda.is_some()
                || args.l.is_some();
            if any_flag {
                return Err(CliError::Config("model parameters given without --model".into()));
            }
            return Ok(None);
        }
    };
    let p = match base {
        ModelParams::Kinetic { l, lambda } => {
            reject("omega", args.omega, "kinetic")?;
            reject_morse(args, "kinetic")?;
            ModelParams::Kinetic {
                l: args.l.unwrap_or(l),
                lambda: args.lambda.unwrap_or(lambda),
            }
        }
        ModelParams::Oscillator { l, omega, lambda } => {
            reject_morse(args, "oscillator")?;
            ModelParams::Oscillator {
                l: args.l.unwrap_or(l),
                omega: args.omega.unwrap_or(omega),
                lambda: args.lambda.unwrap_or(lambda),
            }
        }
        ModelParams::Morse { alpha, depth, gamma } => {
            reject("omega", args.omega, "morse")?;
            reject("lambda", args.lambda, "morse")?;
            reject("l", args.l, "morse")?;
            let alpha = args.alpha.unwrap_or(alpha);
            let gamma = args.gamma.unwrap_or(gamma);
            match args.v0 {
                Some(v0) => ModelParams::morse_from_v0(alpha, v0, gamma)?,
                None => ModelParams::Morse {
                    alpha,
                    depth: args.depth.unwrap_or(depth),
                    gamma,
                },
            }
        }
    };
    Ok(Some(p))
}

fn reject_morse(args: &CommonArgs, model: &str) -> Result<(), CliError> {
    reject("alpha", args.alpha, model)?;
    reject("D", args.depth, model)?;
    reject("V0", args.v0, model)?;
    reject("gamma", args.gamma, model)
}

/// Parameters of the reference configurations.
pub fn defaults(kind: ModelKind) -> ModelParams {
    match kind {
        ModelKind::Kinetic => ModelParams::Kinetic { l: 0, lambda: 1.0 },
        ModelKind::Oscillator => ModelParams::Oscillator {
            l: 0,
            omega: 1.0,
            lambda: 2.0,
        },
        ModelKind::Morse => ModelParams::Morse {
            alpha: 1.0,
            depth: 2.0,
            gamma: 2.0,
        },
    }
}
