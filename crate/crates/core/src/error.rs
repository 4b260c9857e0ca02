use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry: {0}")]
    NonFinite(String),

    #[error("constraint matrix is not full row rank (smallest singular value {singular_value:e})")]
    Rank { singular_value: f64 },

    #[error("objective is not strictly convex (smallest Hessian eigenvalue {lambda_min:e})")]
    Convexity { lambda_min: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {lambda_min:e})")]
    NotPositiveSemidefinite { lambda_min: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("optimizer did not converge (last KKT residual {residual:e})")]
    Optimizer { residual: f64 },

    #[error("integration diverged after t = {last_finite_time}")]
    Divergence { last_finite_time: f64 },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("certification failed: {0}")]
    Certification(String),

    /// A bound's standing inequality does not hold; the message names it.
    #[error("condition violated: {0}")]
    Condition(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("degenerate trajectory pair: {0}")]
    DegeneratePair(String),

    #[error("csv error: {0}")]
    Csv(String),
}

impl Error {
    pub fn is_condition(&self) -> bool {
        matches!(self, Error::Condition(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
