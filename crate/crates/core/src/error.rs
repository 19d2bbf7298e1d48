use thiserror::Error;

/// Domain errors raised by the ROI arithmetic, the analytic propagation
/// routines and the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoiError {
    #[error("monetary amount must be finite and non-negative, got {0}")]
    InvalidMoney(f64),

    #[error("cost must be positive, got {0}")]
    NonPositiveCost(f64),

    #[error("relative error is undefined for a zero value")]
    ZeroValue,

    #[error("worst-case denominator non-positive: cost {cost} with error {cost_error}")]
    WorstCaseDenominator { cost: f64, cost_error: f64 },

    #[error("negative worst-case benefit: benefit {benefit} with error {benefit_error}")]
    NegativeWorstCaseBenefit { benefit: f64, benefit_error: f64 },

    #[error("relative error undefined at zero ROI")]
    ZeroRoi,

    #[error("benefit-cost ratio must be positive and finite, got {0}")]
    InvalidRatio(f64),

    #[error("relative error must be finite and non-negative, got {0}")]
    InvalidRelativeError(f64),

    #[error("cost relative error {0} is at or above the cap of {cap}", cap = crate::simulation::MAX_COST_ERROR)]
    CostErrorTooLarge(f64),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = RoiError> = std::result::Result<T, E>;
