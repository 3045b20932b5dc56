//! Tail-probability engine: standard normal CDF and quantile, binomial
//! lower tails across three evaluation regimes, and a seeded Monte Carlo
//! estimator used as an independent check on every analytic tail.

mod binomial;
mod gamma;
mod mc;
mod normal;
mod tail;

use thiserror::Error;

pub use binomial::{binomial_cdf_exact, binomial_ln_pmf};
pub use gamma::{gamma_p, gamma_q};
pub use mc::{mc_tail_estimate, mc_tail_estimate_with, McConfig, McEstimate, McMode, MC_MIN_TRIALS};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use tail::{
    binomial_tail_lt, resolve_regime, Regime, TailQuery, EXACT_SUM_AUTO_MAX_N, EXACT_SUM_FORCED_MAX_N,
    POISSON_MAX_NP2,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("beta must lie strictly between 0 and 1, got {0}")]
    BetaOutOfRange(f64),
    #[error("invalid tail query: {0}")]
    InvalidQuery(String),
    #[error("exact summation unavailable for n = {n} (limit {limit})")]
    RegimeUnavailable { n: f64, limit: f64 },
    #[error("Monte Carlo needs at least {MC_MIN_TRIALS} trials, got {0}")]
    TrialsTooSmall(u64),
    #[error("incomplete gamma series did not converge for a = {a}, x = {x}")]
    ConvergenceFailure { a: f64, x: f64 },
}
