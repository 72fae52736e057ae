//! `shapeinv`: spectra, factorizations, partner hierarchies and state
//! expansions for shape-invariant tridiagonal Hamiltonians.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical error,
//! 4 failed verification. Errors are printed as `error[<kind>]: <message>`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

mod commands;
mod config;
mod output;
mod verify;

use commands::{FactorArgs, GridArgs, InverseArgs, Perturb, SuperArgs};
use config::{CommonArgs, RunConfig};
use output::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] shapeinv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} verification check(s) failed")]
    Verify { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(shapeinv::Error::InvalidParameter(_)) => 2,
            CliError::Numeric(_) => 3,
            CliError::Verify { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric(e) => e.kind(),
            CliError::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "shapeinv", version, about = "Shape-invariant tridiagonal Hamiltonians")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Levels ε_m and partner levels ε⁺_m
    Spectrum {
        #[arg(long, default_value_t = 5)]
        m_max: usize,
    },
    /// Ladder coefficients c_n, d_n of H - ε₀ = A†A
    Factorize {
        #[command(flatten)]
        source: FactorArgs,
        /// Re-compose A†A and report the largest relative deviation
        #[arg(long)]
        roundtrip: bool,
    },
    /// The partner operator AA†
    Partner {
        #[command(flatten)]
        source: FactorArgs,
    },
    /// Partner hierarchy levels k = 0..=k_max
    Hierarchy {
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        /// Inject a defect into c_n², e.g. `n=5` or `n=5,amount=0.1`
        #[arg(long)]
        perturb: Option<Perturb>,
    },
    /// Ladder chain rebuilt from a spectrum and two seeds
    Inverse(InverseArgs),
    /// Ground-state wavefunction on a grid
    Groundstate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        compare_closed_form: bool,
    },
    /// Coherent-state coefficients over the energy eigenbasis
    Coherent {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        z_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z_im: f64,
        #[arg(long)]
        compare_closed_form: bool,
    },
    /// Superpotential (and optionally the partner potentials) on a grid
    Superpotential(SuperArgs),
    /// Check every identity against its threshold
    Verify {
        /// Inject a defect into c_n², e.g. `n=5`
        #[arg(long)]
        perturb: Option<Perturb>,
        /// Shorthand for --format json
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&cli.common)?;
    if let Some(p) = &cfg.model {
        for w in p.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let mut verify_failed = 0;
    let report: Report = match &cli.command {
        Command::Spectrum { m_max } => commands::spectrum_cmd(&cfg, *m_max)?,
        Command::Factorize { source, roundtrip } => commands::factorize_cmd(&cfg, source, *roundtrip)?,
        Command::Partner { source } => commands::partner_cmd(&cfg, source)?,
        Command::Hierarchy { k_max, perturb } => commands::hierarchy_cmd(&cfg, *k_max, *perturb)?,
        Command::Inverse(args) => commands::inverse_cmd(&cfg, args)?,
        Command::Groundstate { grid, compare_closed_form } => commands::groundstate_cmd(&cfg, grid, *compare_closed_form)?,
        Command::Coherent { z_re, z_im, compare_closed_form } => {
            commands::coherent_cmd(&cfg, Complex64::new(*z_re, *z_im), *compare_closed_form)?
        }
        Command::Superpotential(args) => commands::superpotential_cmd(&cfg, args)?,
        Command::Verify { perturb, json } => {
            if *json {
                cfg.format = Some(config::Format::Json);
            }
            let models = match cfg.model {
                Some(p) => vec![p],
                None => verify::default_models(),
            };
            let lines = verify::run(&models, cfg.n, *perturb)?;
            verify_failed = lines.iter().filter(|l| l.status == verify::Status::Fail).count();
            verify::report(&lines)
        }
    };
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if verify_failed > 0 {
        return Err(CliError::Verify { failed: verify_failed });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
