//! Joint laws of community size and edge density, their mixed moments and
//! the connectivity threshold statistic.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::LN_2;

use crate::error::{domain, invalid_law, Result};
use crate::math::{check_probability, log_sum_exp, one_minus_pow_complement};

/// Tolerance on the weight sum of a normalized law.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// `h(x, q) = 1 - (1 - q)^((x - 1)_+)`: the probability that a fixed member of
/// a size-`x` community with density `q` has at least one neighbour in it.
///
/// `h(0, q) = h(1, q) = 0` and `h(x, 1) = 1` for `x >= 2`.
pub fn h_value(x: u64, q: f64) -> Result<f64> {
    check_probability(q)?;
    Ok(h_unchecked(x, q))
}

pub(crate) fn h_unchecked(x: u64, q: f64) -> f64 {
    if x <= 1 {
        0.0
    } else {
        one_minus_pow_complement(q, (x - 1) as f64)
    }
}

/// `h` for a size given as `log2(x)`; `-inf` encodes size zero.
pub(crate) fn h_log2(log2_size: f64, q: f64) -> f64 {
    if log2_size < 1.0 {
        // Sizes 0 and 1 (log2 < 1 means x < 2 for integer x).
        return 0.0;
    }
    if log2_size < 53.0 {
        let x = libm::round(libm::exp2(log2_size));
        one_minus_pow_complement(q, x - 1.0)
    } else {
        one_minus_pow_complement(q, libm::exp2(log2_size))
    }
}

/// One point of a finite-support law with ordinary sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub size: u64,
    pub density: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(size: u64, density: f64, weight: f64) -> Self {
        Atom { size, density, weight }
    }
}

/// One point of a law whose sizes are too large for any integer type.
/// `log2_size = -inf` stands for size zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAtom {
    pub log2_size: f64,
    pub density: f64,
    pub log_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Support {
    Linear(Vec<Atom>),
    Log(Vec<LogAtom>),
}

/// Normalized, merged, finite-support distribution of `(X, Q)`.
///
/// Atoms are sorted by `(size, density)` and no two atoms share both. A law
/// is either linear or log-domain as a whole; the two are never mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityLaw {
    support: Support,
}

fn canonical_density(q: f64) -> f64 {
    // Collapse -0.0 so merging by bit pattern is sound.
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

impl CommunityLaw {
    /// Validates, normalizes and merges linear atoms.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid_law!("law has no atoms"));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&a.density) {
                return Err(invalid_law!("atom {i}: density {} is outside [0, 1]", a.density));
            }
            if !a.weight.is_finite() || a.weight < 0.0 {
                return Err(invalid_law!(
                    "atom {i}: weight {} must be finite and nonnegative",
                    a.weight
                ));
            }
            total += a.weight;
        }
        if !(total.is_finite() && total > 0.0) {
            return Err(invalid_law!("weights sum to {total}; need a positive finite total"));
        }
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| Atom::new(a.size, canonical_density(a.density), a.weight / total))
            .collect();
        atoms.sort_by(|a, b| {
            a.size
                .cmp(&b.size)
                .then(a.density.partial_cmp(&b.density).unwrap_or(Ordering::Equal))
        });
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.size == a.size && last.density.to_bits() == a.density.to_bits() => {
                    last.weight += a.weight;
                }
                _ => merged.push(a),
            }
        }
        Ok(CommunityLaw {
            support: Support::Linear(merged),
        })
    }

    /// Validates, normalizes and merges log-domain atoms.
    pub fn from_log_atoms(atoms: Vec<LogAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid_law!("law has no atoms"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&a.density) {
                return Err(invalid_law!("atom {i}: density {} is outside [0, 1]", a.density));
            }
            if a.log2_size.is_nan() || a.log2_size == f64::INFINITY {
                return Err(invalid_law!("atom {i}: log2 size {} is not usable", a.log2_size));
            }
            if a.log_weight.is_nan() || a.log_weight == f64::INFINITY {
                return Err(invalid_law!("atom {i}: log weight {} is not usable", a.log_weight));
            }
        }
        let ln_total = log_sum_exp(atoms.iter().map(|a| a.log_weight));
        if ln_total == f64::NEG_INFINITY {
            return Err(invalid_law!("all weights are zero"));
        }
        // Leave already-normalized input untouched so that reloading a law
        // does not shift large log weights by an ulp.
        let ln_total = if ln_total.abs() <= NORMALIZATION_TOLERANCE {
            0.0
        } else {
            ln_total
        };
        let mut atoms: Vec<LogAtom> = atoms
            .into_iter()
            .filter(|a| a.log_weight > f64::NEG_INFINITY)
            .map(|a| LogAtom {
                log2_size: a.log2_size,
                density: canonical_density(a.density),
                log_weight: a.log_weight - ln_total,
            })
            .collect();
        atoms.sort_by(|a, b| {
            a.log2_size
                .partial_cmp(&b.log2_size)
                .unwrap_or(Ordering::Equal)
                .then(a.density.partial_cmp(&b.density).unwrap_or(Ordering::Equal))
        });
        let mut merged: Vec<LogAtom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last)
                    if last.log2_size.to_bits() == a.log2_size.to_bits()
                        && last.density.to_bits() == a.density.to_bits() =>
                {
                    last.log_weight = crate::math::log_add_exp(last.log_weight, a.log_weight);
                }
                _ => merged.push(a),
            }
        }
        Ok(CommunityLaw {
            support: Support::Log(merged),
        })
    }

    /// Point mass at `(x, q)`.
    pub fn degenerate(x: u64, q: f64) -> Result<Self> {
        Self::new(alloc::vec![Atom::new(x, q, 1.0)])
    }

    pub fn is_log_domain(&self) -> bool {
        matches!(self.support, Support::Log(_))
    }

    /// Linear atoms, or `None` for a log-domain law.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.support {
            Support::Linear(a) => Some(a),
            Support::Log(_) => None,
        }
    }

    /// Log-domain atoms, or `None` for a linear law.
    pub fn log_atoms(&self) -> Option<&[LogAtom]> {
        match &self.support {
            Support::Linear(_) => None,
            Support::Log(a) => Some(a),
        }
    }

    pub fn len(&self) -> usize {
        match &self.support {
            Support::Linear(a) => a.len(),
            Support::Log(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weight_sum(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => a.iter().map(|a| a.weight).sum(),
            Support::Log(a) => libm::exp(log_sum_exp(a.iter().map(|a| a.log_weight))),
        }
    }

    /// `E[X h(X, Q)]`.
    pub fn kappa(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => a
                .iter()
                .map(|a| a.weight * a.size as f64 * h_unchecked(a.size, a.density))
                .sum(),
            Support::Log(_) => libm::exp(self.ln_kappa()),
        }
    }

    /// `ln E[X h(X, Q)]`, accumulated in log space for log-domain laws.
    pub fn ln_kappa(&self) -> f64 {
        match &self.support {
            Support::Linear(_) => libm::log(self.kappa()),
            Support::Log(a) => log_sum_exp(
                a.iter()
                    .map(|a| a.log_weight + a.log2_size * LN_2 + libm::log(h_log2(a.log2_size, a.density))),
            ),
        }
    }

    /// `E[X̃ h(X̃, Q)]` with `X̃ = min(X, n)`, summed atom by atom in the same
    /// order as [`kappa`](Self::kappa) so the result never exceeds it.
    pub fn kappa_truncated(&self, n: u64) -> f64 {
        match &self.support {
            Support::Linear(a) => a
                .iter()
                .map(|a| {
                    let x = a.size.min(n);
                    a.weight * x as f64 * h_unchecked(x, a.density)
                })
                .sum(),
            Support::Log(a) => {
                let log2_n = libm::log2(n as f64);
                a.iter()
                    .map(|a| {
                        let w = libm::exp(a.log_weight);
                        if a.log2_size >= log2_n {
                            w * n as f64 * h_unchecked(n, a.density)
                        } else {
                            let x = libm::round(libm::exp2(a.log2_size)) as u64;
                            w * x as f64 * h_unchecked(x, a.density)
                        }
                    })
                    .sum()
            }
        }
    }

    /// Replaces every size by `min(x, n)` and merges coinciding atoms. The
    /// result is always a linear law.
    pub fn truncate(&self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain!("truncation level must be at least 1"));
        }
        let atoms = match &self.support {
            Support::Linear(a) => a
                .iter()
                .map(|a| Atom::new(a.size.min(n), a.density, a.weight))
                .collect(),
            Support::Log(a) => {
                let log2_n = libm::log2(n as f64);
                a.iter()
                    .map(|a| {
                        let size = if a.log2_size >= log2_n {
                            n
                        } else if a.log2_size == f64::NEG_INFINITY {
                            0
                        } else {
                            libm::round(libm::exp2(a.log2_size)) as u64
                        };
                        Atom::new(size, a.density, libm::exp(a.log_weight))
                    })
                    .collect()
            }
        };
        Self::new(atoms)
    }

    /// `alpha = E[Q 1{X >= 2}]`.
    pub fn alpha(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => a.iter().filter(|a| a.size >= 2).map(|a| a.weight * a.density).sum(),
            Support::Log(a) => a
                .iter()
                .filter(|a| a.log2_size >= 1.0)
                .map(|a| libm::exp(a.log_weight) * a.density)
                .sum(),
        }
    }

    /// `E[h(X, Q)]`.
    pub fn mean_h(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => a.iter().map(|a| a.weight * h_unchecked(a.size, a.density)).sum(),
            Support::Log(a) => a
                .iter()
                .map(|a| libm::exp(a.log_weight) * h_log2(a.log2_size, a.density))
                .sum(),
        }
    }

    /// `P{X <= 1}`.
    pub fn prob_at_most_one(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => a.iter().filter(|a| a.size <= 1).map(|a| a.weight).sum(),
            Support::Log(a) => a
                .iter()
                .filter(|a| a.log2_size < 1.0)
                .map(|a| libm::exp(a.log_weight))
                .sum(),
        }
    }

    /// `ln E[X h(X, Q) ln(1 + X)]`.
    pub fn ln_log_moment(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => log_sum_exp(a.iter().map(|a| {
                let x = a.size as f64;
                libm::log(a.weight * x * h_unchecked(a.size, a.density) * libm::log1p(x))
            })),
            Support::Log(a) => log_sum_exp(a.iter().map(|a| {
                a.log_weight
                    + a.log2_size * LN_2
                    + libm::log(h_log2(a.log2_size, a.density))
                    + libm::log(ln_one_plus_pow2(a.log2_size))
            })),
        }
    }

    /// `E[X h(X, Q) ln(1 + X)]`; `+inf` only if the value overflows `f64`.
    pub fn log_moment(&self) -> f64 {
        match &self.support {
            Support::Linear(a) => a
                .iter()
                .map(|a| {
                    let x = a.size as f64;
                    a.weight * x * h_unchecked(a.size, a.density) * libm::log1p(x)
                })
                .sum(),
            Support::Log(_) => libm::exp(self.ln_log_moment()),
        }
    }
}

/// `ln(1 + 2^t)` without overflowing for large `t`.
pub(crate) fn ln_one_plus_pow2(log2_x: f64) -> f64 {
    if log2_x < 52.0 {
        libm::log1p(libm::exp2(log2_x))
    } else {
        log2_x * LN_2 + libm::log1p(libm::exp2(-log2_x))
    }
}

/// Which mixed moment entered the threshold statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaChoice {
    /// `kappa = E[X h(X, Q)]`.
    Untruncated,
    /// `kappa~ = E[X̃ h(X̃, Q)]` with `X̃ = min(X, n)`.
    Truncated,
}

impl KappaChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaChoice::Untruncated => "kappa",
            KappaChoice::Truncated => "kappa_truncated",
        }
    }
}

/// Finite-`n` threshold statistics for a law and a layer count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSummary {
    pub n: u64,
    pub m: u64,
    pub kappa: f64,
    pub kappa_truncated: f64,
    pub kappa_used: KappaChoice,
    /// `ln n - (m / n) * kappa_used`.
    pub lambda: f64,
    /// `E[X h(X, Q) ln(1 + X)]`; `+inf` flags overflow.
    pub log_moment: f64,
    pub alpha: f64,
}

impl ThresholdSummary {
    pub fn kappa_used_value(&self) -> f64 {
        match self.kappa_used {
            KappaChoice::Untruncated => self.kappa,
            KappaChoice::Truncated => self.kappa_truncated,
        }
    }
}

/// `lambda_{n,m} = ln n - (m/n) kappa` together with the moments it depends on.
pub fn lambda_threshold(n: u64, m: u64, law: &CommunityLaw, truncated: bool) -> Result<ThresholdSummary> {
    if n < 2 {
        return Err(domain!("threshold needs n >= 2, got {n}"));
    }
    let kappa = law.kappa();
    let kappa_truncated = law.kappa_truncated(n);
    let kappa_used = if truncated {
        KappaChoice::Truncated
    } else {
        KappaChoice::Untruncated
    };
    let k = if truncated { kappa_truncated } else { kappa };
    let lambda = if m == 0 {
        libm::log(n as f64)
    } else {
        libm::log(n as f64) - (m as f64 / n as f64) * k
    };
    Ok(ThresholdSummary {
        n,
        m,
        kappa,
        kappa_truncated,
        kappa_used,
        lambda,
        log_moment: law.log_moment(),
        alpha: law.alpha(),
    })
}
