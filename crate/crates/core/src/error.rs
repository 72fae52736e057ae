use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Every variant carries enough context (index, value) for the CLI to print
/// a one-line diagnostic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negativity at n={n}: {quantity} = {value:e}")]
    Negativity {
        n: usize,
        quantity: &'static str,
        value: f64,
    },

    #[error("singular recursion at n={n}: P_n vanishes")]
    Singular { n: usize },

    #[error("decoupled chain: b_{n} = 0")]
    Decoupled { n: usize },

    #[error("ground energy {eps0} is not the bottom of the spectrum (sweeps disagree at n={n})")]
    GroundEnergyMismatch { n: usize, eps0: f64 },

    #[error("index {index} outside the bound-state window (last valid index {last})")]
    Range { index: usize, last: usize },

    #[error("series diverges: |Q_(n+1)/Q_n| = {ratio:.6} >= 1 near n={n}")]
    Divergence { n: usize, ratio: f64 },

    #[error("truncation: tail {tail:e} at n={n} exceeds {tolerance:e}")]
    Truncation { n: usize, tail: f64, tolerance: f64 },

    #[error("quadrature did not converge: estimates {coarse:e} and {fine:e} differ")]
    Quadrature { coarse: f64, fine: f64 },

    #[error("{operation} is not available for the {model} model")]
    Unsupported {
        operation: &'static str,
        model: &'static str,
    },
}

impl Error {
    /// Short stable identifier used as a machine-parseable prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "parameter",
            Error::Negativity { .. } => "negativity",
            Error::Singular { .. } => "singular",
            Error::Decoupled { .. } => "decoupled",
            Error::GroundEnergyMismatch { .. } => "ground-energy",
            Error::Range { .. } => "range",
            Error::Divergence { .. } => "divergence",
            Error::Truncation { .. } => "truncation",
            Error::Quadrature { .. } => "quadrature",
            Error::Unsupported { .. } => "unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
