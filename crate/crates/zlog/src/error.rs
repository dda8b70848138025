use thiserror::Error;

/// Errors are split into two families so front ends can map them onto exit
/// codes: bad input (`is_validation`) versus numerical trouble.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("enumeration budget exceeded: {needed} points > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("count N_{index} = {value} is not positive; Z_log is undefined")]
    NonPositiveCount { index: usize, value: String },
    #[error("point {point} lies within {distance:.3e} of a divisor support point")]
    TooCloseToSupport { point: String, distance: f64 },
    #[error("truncation cap exceeded: level {needed} > {cap}")]
    TruncationCap { needed: usize, cap: usize },
    #[error("quadrature did not converge on segment {from} -> {to}")]
    Quadrature { from: String, to: String },
    #[error("pole order mismatch: expected 1, found {found}")]
    OrderMismatch { found: usize },
    #[error("contour: {0}")]
    Contour(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::BudgetExceeded { .. }
                | Error::NonPositiveCount { .. }
                | Error::Degenerate(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NonPositiveCount { .. } => "non_positive_count",
            Error::TooCloseToSupport { .. } => "too_close_to_support",
            Error::TruncationCap { .. } => "truncation_cap",
            Error::Quadrature { .. } => "quadrature",
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::Contour(_) => "contour",
            Error::Degenerate(_) => "degenerate",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
