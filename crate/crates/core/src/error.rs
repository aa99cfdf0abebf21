use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("evaluation budget of {max_evals} exhausted (estimate {estimate:e}, error {error:e})")]
    BudgetExhausted { max_evals: usize, estimate: f64, error: f64 },

    #[error("integral does not converge: {0}")]
    NonIntegrable(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo:e}, f(hi) = {fhi:e}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("ODE integration failed at t = {t}: {reason}")]
    OdeFailure { t: f64, reason: String },

    #[error("extrapolation did not converge: {0}")]
    ExtrapolationFailed(String),

    #[error("inconsistent routes for {quantity}: {first:e} vs {second:e}")]
    Inconsistent { quantity: String, first: f64, second: f64 },

    #[error("operator is not coercive: {0}")]
    NonCoercive(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures that come from the numerics rather than from the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BudgetExhausted { .. }
                | Error::NonIntegrable(_)
                | Error::OdeFailure { .. }
                | Error::ExtrapolationFailed(_)
                | Error::Inconsistent { .. }
        )
    }
}
