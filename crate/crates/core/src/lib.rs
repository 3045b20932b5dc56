//! Statistical model of proof-of-work mining: per-hash success probability,
//! expected revenue and energy cost, and fleet / pool-allocation sizing under
//! coefficient-of-variation and quantile risk constraints.

pub mod chainparams;
pub mod economics;
pub mod error;
pub mod numerics;
pub mod par;
pub mod risk_direct;
pub mod risk_pool;
pub mod scenario;

pub use chainparams::{
    decode_compact, encode_compact, success_probability, ChainError, ChainParams, CompactBits,
    Difficulty, HashProbability, Target256,
};
pub use economics::{EconError, FleetPlan, HardwareSpec, MarketParams};
pub use error::RiskError;
pub use numerics::NumericsError;
pub use par::Exec;
pub use risk_direct::{RiskSpec, SizingMethod, SizingResult};
pub use risk_pool::{AllocationResult, PoolFacility, PoolMoments, PoolSplit};
