use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operand: {0}")]
    InvalidOperand(String),

    #[error("degenerate metric at {at}: det = {det:e}")]
    DegenerateMetric { at: String, det: f64 },

    #[error("non-Killing action field: residual {residual:e} exceeds {tolerance:e}")]
    NonKillingField { residual: f64, tolerance: f64 },

    #[error("fixed point is not isolated: {0}")]
    NonIsolatedFixedPoint(String),

    #[error("Morse-Bott condition violated: normal Hessian det = {det:e}")]
    MorseBottViolation { det: f64 },

    #[error("volume form is not invariant under the action: div_vol X = {residual:e}")]
    InvariantVolumeViolation { residual: f64 },

    #[error("equivariance violated: residual {residual:e}")]
    EquivarianceViolation { residual: f64 },

    #[error("integration domain error: {0}")]
    IntegrationDomain(String),

    #[error("wrong evaluator: {0}")]
    WrongEvaluator(String),

    #[error("precondition `{check}` failed: {detail}")]
    Precondition { check: String, detail: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(check: impl Into<String>, detail: impl Into<String>) -> Error {
        Error::Precondition {
            check: check.into(),
            detail: detail.into(),
        }
    }

    /// Whether the failure is a violated precondition rather than an IO or
    /// configuration problem.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::Config(_))
    }
}
