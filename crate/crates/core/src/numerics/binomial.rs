//! Exact binomial lower tail by term recursion, anchored on a saddle-point
//! (Loader) evaluation of the largest summed term.

use std::f64::consts::PI;

#[allow(clippy::excessive_precision)]
const STIRLERR_INT: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_2,
    0.041_340_695_955_409_294_093_822_1,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_567,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_318,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_152,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)` at integer `n`.
fn stirlerr(n: u64) -> f64 {
    if n < 16 {
        return STIRLERR_INT[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let n = n as f64;
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation
/// when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln P(X = x)` for `X ~ Binomial(n, p)`, `0 < p < 1`.
pub fn binomial_ln_pmf(x: u64, n: u64, p: f64) -> f64 {
    if x > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    let nf = n as f64;
    if x == 0 {
        return nf * (-p).ln_1p();
    }
    if x == n {
        return nf * p.ln();
    }
    let xf = x as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = (2.0 * PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// Relative size below which the remaining (geometrically shrinking) terms
/// are dropped.
const TERM_CUTOFF: f64 = 1e-18;

/// `P(X <= m)` for `X ~ Binomial(n, p)`. Sums from the term nearest the mode
/// outward; when `m` lies above the mode the upper tail is summed instead and
/// complemented.
pub fn binomial_cdf_exact(m: u64, n: u64, p: f64) -> f64 {
    if m >= n {
        return 1.0;
    }
    let q = 1.0 - p;
    let mode = (((n as f64 + 1.0) * p).floor() as u64).min(n);
    if m <= mode {
        let (mut j, mut term, mut sum) = (m, 1.0f64, 1.0f64);
        while j > 0 {
            term *= j as f64 * q / ((n - j + 1) as f64 * p);
            sum += term;
            j -= 1;
            if term < sum * TERM_CUTOFF {
                break;
            }
        }
        (binomial_ln_pmf(m, n, p).exp() * sum).min(1.0)
    } else {
        let (mut j, mut term, mut sum) = (m + 1, 1.0f64, 1.0f64);
        while j < n {
            term *= (n - j) as f64 * p / ((j + 1) as f64 * q);
            sum += term;
            j += 1;
            if term < sum * TERM_CUTOFF {
                break;
            }
        }
        (1.0 - binomial_ln_pmf(m + 1, n, p).exp() * sum).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Naive oracle: multiplicative recursion from `(1-p)^n` upward.
    fn naive_cdf(m: u64, n: u64, p: f64) -> f64 {
        let mut term = (1.0 - p).powi(n as i32);
        let mut sum = term;
        for j in 1..=m.min(n) {
            term *= (n - j + 1) as f64 / j as f64 * p / (1.0 - p);
            sum += term;
        }
        sum
    }

    #[test]
    fn ten_fair_coins() {
        // 1 + 10 + 45 + 120 + 210 = 386 of 1024
        assert!((binomial_cdf_exact(4, 10, 0.5) - 0.376953125).abs() < 1e-15);
    }

    #[test]
    fn pmf_matches_closed_form() {
        let lp = binomial_ln_pmf(3, 10, 0.25);
        let exact = 120.0 * 0.25f64.powi(3) * 0.75f64.powi(7);
        assert!((lp.exp() - exact).abs() < 1e-15);
        assert_eq!(binomial_ln_pmf(11, 10, 0.25), f64::NEG_INFINITY);
    }

    #[test]
    fn matches_naive_sum() {
        for &(n, p) in &[(50u64, 0.1), (200, 0.37), (1000, 0.003), (700, 0.6)] {
            for m in 0..n {
                let a = binomial_cdf_exact(m, n, p);
                let b = naive_cdf(m, n, p);
                assert!((a - b).abs() < 1e-13, "n={n} p={p} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn large_n_does_not_underflow() {
        // (1/2)^1e6 underflows; the mode-anchored sum does not care.
        let v = binomial_cdf_exact(500_000, 1_000_000, 0.5);
        assert!((v - 0.5).abs() < 1e-3, "{v}");
    }
}
