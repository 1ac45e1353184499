//! Heavy-tailed size law showing that the threshold dichotomy needs the
//! `E[X h(X, Q) ln(1 + X)] < inf` moment condition.
//!
//! Atoms sit at `x_k = 2^(2^(y_k))` with weights proportional to
//! `p_k = 1 / (x_k ln x_k)` and density one. Sizes overflow every integer
//! type from `y_k = 6` on, so everything here works with `ln x_k`.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{domain, Result};
use crate::law::{ln_one_plus_pow2, CommunityLaw, LogAtom};
use crate::math::{log_add_exp, log_sum_exp};

/// Largest `y_k` accepted; `2^y` must stay an exact, modest `f64` exponent.
pub const MAX_Y: u32 = 60;

/// Tail-mean cap used when choosing the size floor.
pub const DEFAULT_TAIL_CAP: f64 = 0.5;

/// `L` in `X = X' 1{X' >= L}`, stored as `log2 L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeFloor {
    pub log2: f64,
}

impl SizeFloor {
    /// No atom is floored.
    pub const NONE: SizeFloor = SizeFloor {
        log2: f64::NEG_INFINITY,
    };

    pub fn from_size(size: f64) -> Self {
        SizeFloor {
            log2: if size <= 0.0 {
                f64::NEG_INFINITY
            } else {
                libm::log2(size)
            },
        }
    }

    fn keeps(&self, log2_size: f64) -> bool {
        log2_size >= self.log2
    }
}

/// Sequence `y_1 < y_2 < ...` and the tabulated `f(y_k)` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleInput {
    y: Vec<u32>,
    f: Vec<f64>,
}

/// One row of the partial-sum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub k: usize,
    pub y: u32,
    /// `p_k x_k ln(1 + x_k) / S`.
    pub term: f64,
    /// `f(y_k) p_k x_k ln(1 + x_k) / S`.
    pub weighted_term: f64,
    /// Partial sum of `E[X' ln(1 + X')]` up to `k`.
    pub partial: f64,
    /// Partial sum of `E[X' f(X') ln(1 + X')]` up to `k`.
    pub weighted_partial: f64,
}

/// Connectivity lower bound and threshold value at `n = x_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub k: usize,
    pub y: u32,
    /// `log2 n = 2^(y_k)`.
    pub log2_n: f64,
    pub ln_n: f64,
    /// `ln m` for `m = floor(n ln n)`.
    pub ln_m: f64,
    /// `m / (n ln n)`.
    pub m_ratio: f64,
    /// `m P{X' >= n}` within the truncated law.
    pub m_tail: f64,
    /// `1 - exp(-m P{X' >= n})`, a lower bound on `P{connected}`.
    pub connect_lower: f64,
    pub connect_lower_holds: bool,
    /// Whether `n >= L`, the range where the bound applies to `X`.
    pub above_floor: bool,
    /// `lambda_{n,m} = ln n - (m / n) kappa` for the floored law.
    pub lambda: f64,
    pub half_ln_n: f64,
    pub lambda_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub k_max: usize,
    pub ln_s: f64,
    pub floor: SizeFloor,
    /// `E[X' 1{X' >= L}]`, the tail mean left after flooring.
    pub floored_mean: f64,
    /// `kappa = E[X]` of the floored law (density one).
    pub kappa: f64,
    /// `1 - e^(-1)`.
    pub reference_bound: f64,
    pub moments: Vec<MomentRow>,
    pub rows: Vec<ReportRow>,
}

impl CounterexampleInput {
    /// `f` holds `f(y_k)` for each `y_k`; a nonincreasing `f` makes these
    /// upper bounds on `f(x_k)`.
    pub fn new(y: Vec<u32>, f: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(domain!("y sequence is empty"));
        }
        if y.len() != f.len() {
            return Err(domain!("y has {} entries but f has {}", y.len(), f.len()));
        }
        if y[0] == 0 {
            return Err(domain!("y values must be positive"));
        }
        if let Some(w) = y.windows(2).find(|w| w[0] >= w[1]) {
            return Err(domain!("y sequence must be increasing, found {} then {}", w[0], w[1]));
        }
        if let Some(&big) = y.iter().find(|&&v| v > MAX_Y) {
            return Err(domain!(
                "y = {big} exceeds {MAX_Y}: log2 of the size, 2^y, leaves the supported exponent range"
            ));
        }
        if let Some(bad) = f.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(domain!("f values must be positive and finite, got {bad}"));
        }
        Ok(CounterexampleInput { y, f })
    }

    /// `y_k = base + k - 1` paired with `f(y) = ratio^y`.
    pub fn geometric(first_y: u32, count: usize, ratio: f64) -> Result<Self> {
        let y: Vec<u32> = (0..count as u32).map(|i| first_y + i).collect();
        let f = y.iter().map(|&v| libm::pow(ratio, v as f64)).collect();
        Self::new(y, f)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.y.len() {
            return Err(domain!("truncation index {k} is outside [1, {}]", self.y.len()));
        }
        Ok(())
    }

    fn log2_size(&self, k: usize) -> f64 {
        libm::exp2(self.y[k] as f64)
    }

    /// `ln x_k`.
    fn ln_size(&self, k: usize) -> f64 {
        self.log2_size(k) * LN_2
    }

    /// `ln p_k = -(ln x_k + ln ln x_k)`.
    fn ln_p(&self, k: usize) -> f64 {
        let ln_x = self.ln_size(k);
        -(ln_x + libm::log(ln_x))
    }

    /// `ln S_K`.
    pub fn ln_normalizer(&self, k_max: usize) -> Result<f64> {
        self.check_k(k_max)?;
        Ok(log_sum_exp((0..k_max).map(|k| self.ln_p(k))))
    }

    /// Law of `X = X' 1{X' >= L}` with `X'` on the first `k_max` atoms.
    pub fn law(&self, k_max: usize, floor: SizeFloor) -> Result<CommunityLaw> {
        self.check_k(k_max)?;
        let mut atoms = Vec::with_capacity(k_max + 1);
        let mut ln_dropped = f64::NEG_INFINITY;
        for k in 0..k_max {
            let log2_size = self.log2_size(k);
            if floor.keeps(log2_size) {
                atoms.push(LogAtom {
                    log2_size,
                    density: 1.0,
                    log_weight: self.ln_p(k),
                });
            } else {
                ln_dropped = log_add_exp(ln_dropped, self.ln_p(k));
            }
        }
        if ln_dropped > f64::NEG_INFINITY {
            atoms.push(LogAtom {
                log2_size: f64::NEG_INFINITY,
                density: 1.0,
                log_weight: ln_dropped,
            });
        }
        CommunityLaw::from_log_atoms(atoms)
    }

    /// `ln E[X' 1{X' >= x_j}]` over the first `k_max` atoms.
    fn ln_tail_mean(&self, j: usize, k_max: usize, ln_s: f64) -> f64 {
        // p_k x_k = 1 / ln x_k.
        log_sum_exp((j..k_max).map(|k| -libm::log(self.ln_size(k)))) - ln_s
    }

    /// Smallest atom size `L` with `E[X' 1{X' >= L}] <= tail_cap`. Returns a
    /// floor above every atom when even the largest atom alone exceeds it.
    pub fn smallest_floor(&self, k_max: usize, tail_cap: f64) -> Result<SizeFloor> {
        let ln_s = self.ln_normalizer(k_max)?;
        let ln_cap = libm::log(tail_cap);
        for j in 0..k_max {
            if self.ln_tail_mean(j, k_max, ln_s) <= ln_cap {
                return Ok(SizeFloor {
                    log2: self.log2_size(j),
                });
            }
        }
        Ok(SizeFloor { log2: f64::INFINITY })
    }

    /// Partial sums of `E[X' ln(1 + X')]` and `E[X' f(X') ln(1 + X')]` for
    /// `K = 1..k_max`, with the law normalized at `k_max`.
    pub fn moment_partial_sums(&self, k_max: usize) -> Result<Vec<MomentRow>> {
        let ln_s = self.ln_normalizer(k_max)?;
        let mut rows = Vec::with_capacity(k_max);
        let (mut partial, mut weighted_partial) = (0.0, 0.0);
        for k in 0..k_max {
            let ln_term = self.ln_p(k) + self.ln_size(k) + libm::log(ln_one_plus_pow2(self.log2_size(k))) - ln_s;
            let term = libm::exp(ln_term);
            let weighted_term = libm::exp(ln_term + libm::log(self.f[k]));
            partial += term;
            weighted_partial += weighted_term;
            rows.push(MomentRow {
                k: k + 1,
                y: self.y[k],
                term,
                weighted_term,
                partial,
                weighted_partial,
            });
        }
        Ok(rows)
    }

    /// Moment table plus, for each `n = x_k` and `m = floor(n ln n)`, the
    /// connectivity lower bound and the threshold value, with the size floor
    /// chosen by [`smallest_floor`](Self::smallest_floor).
    pub fn report(&self, k_max: usize) -> Result<CounterexampleReport> {
        let moments = self.moment_partial_sums(k_max)?;
        let ln_s = self.ln_normalizer(k_max)?;
        let floor = self.smallest_floor(k_max, DEFAULT_TAIL_CAP)?;
        let first_kept = (0..k_max).find(|&k| floor.keeps(self.log2_size(k)));
        let floored_mean = first_kept.map_or(0.0, |j| libm::exp(self.ln_tail_mean(j, k_max, ln_s)));
        // Density one: kappa = E[X] = floored tail mean.
        let kappa = floored_mean;
        let reference_bound = -libm::expm1(-1.0);
        let mut rows = Vec::with_capacity(k_max);
        for k in 0..k_max {
            let log2_n = self.log2_size(k);
            let ln_n = self.ln_size(k);
            let ln_n_ln_n = ln_n + libm::log(ln_n);
            let ln_m = if ln_n_ln_n < 52.0 * LN_2 {
                let n = libm::exp2(log2_n);
                libm::log(libm::floor(n * ln_n))
            } else {
                ln_n_ln_n
            };
            let m_ratio = libm::exp(ln_m - ln_n_ln_n);
            let ln_tail_prob = log_sum_exp((k..k_max).map(|j| self.ln_p(j))) - ln_s;
            let m_tail = libm::exp(ln_m + ln_tail_prob);
            let connect_lower = -libm::expm1(-m_tail);
            let lambda = ln_n * (1.0 - m_ratio * kappa);
            rows.push(ReportRow {
                k: k + 1,
                y: self.y[k],
                log2_n,
                ln_n,
                ln_m,
                m_ratio,
                m_tail,
                connect_lower,
                connect_lower_holds: connect_lower >= reference_bound,
                above_floor: floor.keeps(log2_n),
                lambda,
                half_ln_n: 0.5 * ln_n,
                lambda_holds: lambda >= 0.5 * ln_n,
            });
        }
        Ok(CounterexampleReport {
            k_max,
            ln_s,
            floor,
            floored_mean,
            kappa,
            reference_bound,
            moments,
            rows,
        })
    }
}
