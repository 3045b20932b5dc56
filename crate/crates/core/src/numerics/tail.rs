use super::binomial::binomial_cdf_exact;
use super::gamma::gamma_q;
use super::normal::std_normal_cdf;
use super::NumericsError;

/// Auto-selection uses exact summation up to this many trials.
pub const EXACT_SUM_AUTO_MAX_N: f64 = 1e6;
/// Hard limit when exact summation is requested explicitly.
pub const EXACT_SUM_FORCED_MAX_N: f64 = 1e7;
/// The Poisson limit is used when `n p^2` (a total-variation bound on the
/// Poisson-vs-binomial error) is at most this.
pub const POISSON_MAX_NP2: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Regime {
    #[default]
    Auto,
    ExactSum,
    PoissonGamma,
    NormalApprox,
}

/// Lower-tail query `P(X < k)` for `X ~ Binomial(n, p)`.
///
/// `n` is a real so mainnet-scale hash counts (~1e26) can be expressed; the
/// exact-sum regime rounds it to the nearest integer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailQuery {
    pub n: f64,
    pub p: f64,
    pub k: f64,
    pub regime: Regime,
}

impl TailQuery {
    pub fn new(n: f64, p: f64, k: f64) -> Result<Self, NumericsError> {
        let q = TailQuery {
            n,
            p,
            k,
            regime: Regime::Auto,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn mean(&self) -> f64 {
        self.n * self.p
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.n.is_finite() && self.n > 0.0) {
            return Err(NumericsError::InvalidQuery(format!("n must be > 0, got {}", self.n)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(NumericsError::InvalidQuery(format!(
                "p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(NumericsError::InvalidQuery(format!("k must be >= 0, got {}", self.k)));
        }
        Ok(())
    }
}

/// The concrete regime a query will be evaluated in.
pub fn resolve_regime(q: &TailQuery) -> Result<Regime, NumericsError> {
    match q.regime {
        Regime::Auto => Ok(if q.n <= EXACT_SUM_AUTO_MAX_N {
            Regime::ExactSum
        } else if q.n * q.p * q.p <= POISSON_MAX_NP2 {
            Regime::PoissonGamma
        } else {
            Regime::NormalApprox
        }),
        Regime::ExactSum if q.n > EXACT_SUM_FORCED_MAX_N => Err(NumericsError::RegimeUnavailable {
            n: q.n,
            limit: EXACT_SUM_FORCED_MAX_N,
        }),
        other => Ok(other),
    }
}

/// Largest integer strictly below `k`, or `None` when the event `X < k` is
/// empty.
fn last_count_below(k: f64) -> Option<f64> {
    let m = k.ceil() - 1.0;
    (m >= 0.0).then_some(m)
}

/// `P(X < k) = P(X <= ceil(k) - 1)`.
pub fn binomial_tail_lt(q: &TailQuery) -> Result<f64, NumericsError> {
    q.validate()?;
    let regime = resolve_regime(q)?;
    if regime == Regime::NormalApprox {
        let mean = q.mean();
        let sd = (mean * (1.0 - q.p)).sqrt();
        return Ok(std_normal_cdf((q.k - mean) / sd));
    }
    let Some(m) = last_count_below(q.k) else {
        return Ok(0.0);
    };
    match regime {
        Regime::ExactSum => {
            let n = q.n.round();
            if m >= n {
                return Ok(1.0);
            }
            Ok(binomial_cdf_exact(m as u64, n as u64, q.p))
        }
        Regime::PoissonGamma => gamma_q(m + 1.0, q.mean()),
        Regime::Auto | Regime::NormalApprox => unreachable!("resolved above"),
    }
}
