//! Small numerical kernels shared by the law, exact and sweep modules.

use crate::error::{domain, Result};

/// Below this many factors `ln_choose` multiplies ratios instead of calling
/// `lgamma`, which loses absolute accuracy for large arguments.
const DIRECT_CHOOSE_LIMIT: u64 = 64;

/// `ln(sum(exp(v)))` with the maximum shifted out. Returns `-inf` for an
/// empty input or when every value is `-inf`.
pub fn log_sum_exp<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = values.into_iter();
    let max = iter.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = iter.map(|v| libm::exp(v - max)).sum();
    max + libm::log(sum)
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Natural log of the binomial coefficient `C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= DIRECT_CHOOSE_LIMIT {
        let base = (n - k) as f64;
        (1..=k).map(|i| libm::log((base + i as f64) / i as f64)).sum()
    } else {
        libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
    }
}

/// Falling factorial `(a)_2 = a (a - 1)` as a real.
pub fn falling2(a: u64) -> f64 {
    if a < 2 {
        0.0
    } else {
        a as f64 * (a - 1) as f64
    }
}

pub(crate) fn check_probability(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(domain!("probability {q} is outside [0, 1]"))
    }
}

/// `1 - (1 - q)^e` for a real exponent `e >= 0`, evaluated through
/// `expm1`/`log1p` so small `q` keeps full relative precision.
pub(crate) fn one_minus_pow_complement(q: f64, exponent: f64) -> f64 {
    if exponent <= 0.0 || q == 0.0 {
        0.0
    } else if q == 1.0 {
        1.0
    } else {
        -libm::expm1(exponent * libm::log1p(-q))
    }
}

/// `(1 - q)^e` for a real exponent `e >= 0`, with `0^0 = 1`.
pub(crate) fn pow_complement(q: f64, exponent: f64) -> f64 {
    if exponent <= 0.0 {
        1.0
    } else if q == 1.0 {
        0.0
    } else {
        libm::exp(exponent * libm::log1p(-q))
    }
}
