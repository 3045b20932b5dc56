//! Seeded Monte Carlo estimate of `P(X < k)`.
//!
//! Trials are cut into fixed-size chunks; chunk `i` draws from ChaCha8 stream
//! `i` under the caller's seed. Hit counts are integers, so the estimate is
//! bit-identical for a given `(seed, trials)` whatever the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use super::tail::TailQuery;
use super::NumericsError;
use crate::par::{self, Exec};

pub const MC_MIN_TRIALS: u64 = 100;
const CHUNK: u64 = 16_384;
/// Largest trial count sampled as a binomial; beyond this the Poisson limit
/// is sampled instead.
const BINOMIAL_MAX_N: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McMode {
    Binomial,
    Poisson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// `sqrt(phat (1 - phat) / trials)`
    pub stderr: f64,
    pub hits: u64,
    pub trials: u64,
    pub mode: McMode,
}

impl McEstimate {
    /// Deviation from `analytic` in units of the sampling standard deviation
    /// implied by `analytic`. A degenerate analytic value (0 or 1) must be
    /// matched exactly.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let diff = self.estimate - analytic;
        let sigma = (analytic * (1.0 - analytic) / self.trials as f64).sqrt();
        if sigma > 0.0 {
            diff / sigma
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn agrees_with(&self, analytic: f64, n_sigma: f64) -> bool {
        self.z_score(analytic).abs() <= n_sigma
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

pub fn mc_tail_estimate(q: &TailQuery, cfg: &McConfig) -> Result<McEstimate, NumericsError> {
    mc_tail_estimate_with(q, cfg, Exec::default())
}

pub fn mc_tail_estimate_with(
    q: &TailQuery,
    cfg: &McConfig,
    exec: Exec,
) -> Result<McEstimate, NumericsError> {
    q.validate()?;
    if cfg.trials < MC_MIN_TRIALS {
        return Err(NumericsError::TrialsTooSmall(cfg.trials));
    }
    let chunks = cfg.trials.div_ceil(CHUNK);
    let chunk_len = |i: u64| (cfg.trials - i * CHUNK).min(CHUNK);
    let k = q.k;

    let (mode, hits) = if q.n <= BINOMIAL_MAX_N {
        let dist = Binomial::new(q.n.round() as u64, q.p)
            .map_err(|e| NumericsError::InvalidQuery(e.to_string()))?;
        let hits = par::sum_u64(exec, chunks, |i| {
            let mut rng = chunk_rng(cfg.seed, i);
            (0..chunk_len(i))
                .filter(|_| (dist.sample(&mut rng) as f64) < k)
                .count() as u64
        });
        (McMode::Binomial, hits)
    } else {
        let dist =
            Poisson::new(q.mean()).map_err(|e| NumericsError::InvalidQuery(e.to_string()))?;
        let hits = par::sum_u64(exec, chunks, |i| {
            let mut rng = chunk_rng(cfg.seed, i);
            (0..chunk_len(i)).filter(|_| dist.sample(&mut rng) < k).count() as u64
        });
        (McMode::Poisson, hits)
    };

    let estimate = hits as f64 / cfg.trials as f64;
    Ok(McEstimate {
        estimate,
        stderr: (estimate * (1.0 - estimate) / cfg.trials as f64).sqrt(),
        hits,
        trials: cfg.trials,
        mode,
    })
}
