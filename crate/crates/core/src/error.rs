use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single reason a candidate list of operators is not a POVM.
#[derive(Debug, Clone, PartialEq)]
pub enum PovmDefect {
    NotSelfAdjoint { index: usize, deviation: f64 },
    NotPositive { index: usize, min_eigenvalue: f64 },
    NotComplete { residual: f64 },
}

impl fmt::Display for PovmDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PovmDefect::NotSelfAdjoint { index, deviation } => {
                write!(f, "element {index} is not self-adjoint (deviation {deviation:.3e})")
            }
            PovmDefect::NotPositive { index, min_eigenvalue } => {
                write!(f, "element {index} is not positive (min eigenvalue {min_eigenvalue:.6e})")
            }
            PovmDefect::NotComplete { residual } => {
                write!(f, "elements do not sum to identity (residual {residual:.3e})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty input")]
    Empty,
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("operator is not self-adjoint (deviation {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("invalid POVM: {}", join(.0))]
    InvalidPovm(Vec<PovmDefect>),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid Markov matrix: {0}")]
    InvalidMarkov(String),
    #[error("operator lies outside the POVM span (residual {0:.3e})")]
    OutsideSpan(f64),
    #[error("outcomes {0:?} have zero probability under the ensemble barycenter")]
    DegenerateMetric(Vec<usize>),
    #[error("index {index} out of range for {len} outcomes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("qubit routine called with dimension {0}")]
    NotQubit(usize),
    #[error("ensemble barycenter is not I/2 (deviation {0:.3e})")]
    NotIsotropic(f64),
    #[error("element {0} has vanishing trace but nonzero Bloch vector")]
    ZeroAlpha(usize),
    #[error("Vandermonde matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("POVM is not AB-informationally complete (residual {0:.3e})")]
    NotAbInfocomplete(f64),
    #[error("linear program failed: {0}")]
    Solver(String),
}

fn join(defects: &[PovmDefect]) -> String {
    defects
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
