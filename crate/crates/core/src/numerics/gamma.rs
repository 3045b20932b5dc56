//! Regularized incomplete gamma functions. `Q(m + 1, lambda)` is the Poisson
//! CDF `P(Y <= m)`, which is how the Poisson regime evaluates binomial tails.

use libm::lgamma as ln_gamma;

use super::NumericsError;

const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Lower regularized incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64, NumericsError> {
    gamma_pq(a, x).map(|(p, _)| p)
}

/// Upper regularized incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64, NumericsError> {
    gamma_pq(a, x).map(|(_, q)| q)
}

fn gamma_pq(a: f64, x: f64) -> Result<(f64, f64), NumericsError> {
    if !(a > 0.0 && x >= 0.0 && a.is_finite() && x.is_finite()) {
        return Err(NumericsError::InvalidQuery(format!(
            "incomplete gamma needs a > 0, x >= 0 (a = {a}, x = {x})"
        )));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let p = series(a, x, ln_prefactor)?;
        Ok((p, 1.0 - p))
    } else {
        let q = continued_fraction(a, x, ln_prefactor)?;
        Ok((1.0 - q, q))
    }
}

/// `P(a, x) = e^{-x} x^a / Gamma(a) * sum_n x^n / (a (a+1) ... (a+n))`.
fn series(a: f64, x: f64, ln_prefactor: f64) -> Result<f64, NumericsError> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok((ln_prefactor.exp() * sum).min(1.0));
        }
    }
    Err(NumericsError::ConvergenceFailure { a, x })
}

/// Modified Lentz evaluation of the continued fraction for `Q(a, x)`.
fn continued_fraction(a: f64, x: f64, ln_prefactor: f64) -> Result<f64, NumericsError> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok((ln_prefactor.exp() * h).min(1.0));
        }
    }
    Err(NumericsError::ConvergenceFailure { a, x })
}
