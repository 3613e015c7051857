use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} > {tolerance:.1e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("matrix is singular (|det| = {det:.3e})")]
    Singular { det: f64 },

    #[error("eigenvalue iteration did not converge within {budget} iterations")]
    ConvergenceFailure { budget: usize },

    #[error("velocity inversion diverged: residual {residual:.3e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("state outside model domain: {0}")]
    Domain(String),

    #[error("direction is not a unit vector (|w| = {norm})")]
    NotUnit { norm: f64 },

    #[error("least-squares fit is degenerate: momentum probes are rank-deficient")]
    FitDegenerate,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("non-hyperbolic state in cell {cell}: acoustic eigenvalue {eigenvalue:.3e}")]
    NonHyperbolicState { cell: usize, eigenvalue: f64 },

    #[error("solution blew up at step {step} (norm {norm:.3e})")]
    Blowup { step: usize, norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
