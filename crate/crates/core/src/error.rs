use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("hash count must be positive, got {0}")]
    NonPositiveHashes(f64),
    #[error("revenue-floor factor alpha must be below 1 for sizing, got {0}")]
    AlphaNotBelowOne(f64),
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("no machine count in [1, {upper}] satisfies the tail constraint")]
    SearchBoundsExceeded { upper: u64 },
    #[error("no pooled allocation in [0, H'] satisfies the constraint")]
    InfeasibleAllocation,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
