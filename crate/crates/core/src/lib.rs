//! Finite-dimensional POVM toolkit: Hilbert-Schmidt operator algebra, dual
//! frames and processing functions, optimal duals for state ensembles,
//! classical post-processing, AB-spaces, qubit optimality and Monte Carlo
//! validation.

pub mod abspace;
pub mod error;
pub mod hs;
mod lp;
pub mod montecarlo;
pub mod postproc;
pub mod povm;
pub mod processing;
pub mod qubit;
pub mod random;
pub mod tol;

pub use error::{Error, PovmDefect, Result};
pub use hs::{Operator, C64};
pub use postproc::{MarkovMatrix, PostProcessingVerdict};
pub use povm::{DualFrame, Observable, Povm};
pub use processing::Ensemble;
pub use tol::Tolerances;
