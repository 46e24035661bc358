use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("reduced interaction matrix not positive definite (smallest eigenvalue {smallest_eigenvalue:e})")]
    NotPositiveDefinite { smallest_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mean-field solver did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("degenerate critical point: {0}")]
    Degenerate(String),

    #[error("minimum could not be classified: {0}")]
    Unclassified(String),

    #[error("enumeration budget exceeded: {states} grid states > {budget}")]
    BudgetExceeded { states: u128, budget: u64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("conditioning ball contains no grid point")]
    EmptySupport,

    #[error("normalization exponent mismatch: {0}")]
    ExponentMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
