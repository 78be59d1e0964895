use thiserror::Error;

/// Errors surfaced by the numeric layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("resolvent shift must be positive, got {0}")]
    NonpositiveShift(f64),

    #[error("atom budget exceeded: product support would hold {needed} atoms (budget {budget})")]
    AtomBudget { needed: usize, budget: usize },

    #[error("Hermitian symmetry violated: imaginary residue {residue:.3e} above threshold")]
    SymmetryViolation { residue: f64 },

    #[error("operation undefined on the zero function")]
    ZeroFunction,

    #[error("Neumann contraction violated: q = {q:.6} >= 1")]
    ContractionViolation { q: f64 },

    #[error("rejection sampler acceptance rate {rate:.3e} below 1e-3; envelope misconfigured")]
    EnvelopeMisconfigured { rate: f64 },

    #[error("quadrature refinement not converging: last delta {delta:.3e}")]
    QuadratureNotConverged { delta: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("solver failure at (delta={delta}, rep={rep}): {msg}")]
    SolveFailure { delta: f64, rep: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
