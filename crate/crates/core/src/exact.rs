//! Closed-form finite-`n` probabilities: isolated-vertex moments, single-layer
//! cut probabilities, their upper bounds, and the union bound on
//! disconnection.
//!
//! Products of probabilities are accumulated as sums of logarithms and sums
//! of positive terms go through [`log_sum_exp`], so `n` in the tens of
//! thousands and `m` in the millions stay inside `f64` range.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::law::{h_unchecked, CommunityLaw};
use crate::math::{check_probability, falling2, ln_choose, log_sum_exp, one_minus_pow_complement, pow_complement};
use crate::schedule::{LayerGroup, LayerSchedule};

/// Largest `n` the union bound accepts without an explicit override.
pub const UNION_BOUND_N_CAP: u64 = 5000;

/// Negative variance round-off tolerated before reporting an inconsistency.
pub const VARIANCE_TOLERANCE: f64 = 1e-9;

/// Probability that one layer of size `x` and density `q`, placed on a
/// uniformly random `x`-subset of `[n]`, has no edge across the cut
/// `[r] | [n] \ [r]`.
///
/// Evaluates the hypergeometric mixture
/// `sum_j C(r, j) C(n - r, x - j) (1 - q)^(j (x - j)) / C(n, x)` in log space.
/// The normalizer is taken as the sum of the same binomial products
/// (Vandermonde), which keeps the result inside `[0, 1]` and exactly `1` at
/// `q = 0`.
pub fn cut_prob_exact(n: u64, r: u64, x: u64, q: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain!("cut probability needs n >= 2, got {n}"));
    }
    if r == 0 || r >= n {
        return Err(domain!("cut size r = {r} is outside [1, {}]", n - 1));
    }
    if x > n {
        return Err(domain!("layer size {x} exceeds n = {n}"));
    }
    check_probability(q)?;
    Ok(cut_prob_unchecked(n, r, x, q))
}

fn cut_prob_unchecked(n: u64, r: u64, x: u64, q: f64) -> f64 {
    if x <= 1 || q == 0.0 {
        return 1.0;
    }
    let rest = n - r;
    let lo = x.saturating_sub(rest);
    let hi = r.min(x);
    let ln_keep = libm::log1p(-q);

    // ln C(r, j) + ln C(n - r, x - j), advanced by the exact term ratio.
    let mut ln_a = ln_choose(r, lo) + ln_choose(rest, x - lo);
    let mut ln_binom = Vec::with_capacity((hi - lo + 1) as usize);
    let mut ln_weighted = Vec::with_capacity((hi - lo + 1) as usize);
    for j in lo..=hi {
        let crossing = j * (x - j);
        let ln_w = if crossing == 0 {
            0.0
        } else if q == 1.0 {
            f64::NEG_INFINITY
        } else {
            crossing as f64 * ln_keep
        };
        ln_binom.push(ln_a);
        ln_weighted.push(ln_a + ln_w);
        if j < hi {
            let num = (r - j) as f64 * (x - j) as f64;
            let den = (j + 1) as f64 * (rest - (x - j) + 1) as f64;
            ln_a += libm::log(num / den);
        }
    }
    let value = libm::exp(log_sum_exp(ln_weighted.iter().copied()) - log_sum_exp(ln_binom.iter().copied()));
    value.min(1.0)
}

/// `R_2(r, x) = e^(-r x / n) - 1 + r x / n`.
pub fn r2_remainder(n: u64, r: u64, x: u64) -> f64 {
    let t = r as f64 * x as f64 / n as f64;
    libm::expm1(-t) + t
}

/// `R_1 = r^2 / (n - r)^2`.
pub fn r1_remainder(n: u64, r: u64) -> f64 {
    let ratio = r as f64 / (n - r) as f64;
    ratio * ratio
}

/// Upper bounds on a single-layer cut probability and their remainder terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutProbBounds {
    /// `1 - 2 q r (n - r) / (n (n - 1))`.
    pub bound_simple: f64,
    /// `1 - (r x / n - R_1 - R_2) h(x, q)`.
    pub bound_refined: f64,
    pub r1: f64,
    pub r2: f64,
}

fn check_cut_range(n: u64, r: u64) -> Result<()> {
    if n < 2 {
        return Err(domain!("need n >= 2, got {n}"));
    }
    if r == 0 || 2 * r > n {
        return Err(domain!("cut size r = {r} is outside [1, n/2] for n = {n}"));
    }
    Ok(())
}

fn cut_scale(n: u64, r: u64) -> f64 {
    2.0 * r as f64 * (n - r) as f64 / (n as f64 * (n - 1) as f64)
}

/// Both single-layer cut bounds for `1 <= r <= n/2` and `2 <= x <= n`.
pub fn cut_prob_bounds(n: u64, r: u64, x: u64, q: f64) -> Result<CutProbBounds> {
    check_cut_range(n, r)?;
    if x < 2 || x > n {
        return Err(domain!("layer size x = {x} is outside [2, {n}]"));
    }
    check_probability(q)?;
    let r1 = r1_remainder(n, r);
    let r2 = r2_remainder(n, r, x);
    let h = h_unchecked(x, q);
    Ok(CutProbBounds {
        bound_simple: 1.0 - cut_scale(n, r) * q,
        bound_refined: 1.0 - (r as f64 * x as f64 / n as f64 - r1 - r2) * h,
        r1,
        r2,
    })
}

/// Cut probability of one layer averaged over its law, with both bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutBound {
    pub r: u64,
    pub qbar_exact: f64,
    pub bound_simple: f64,
    pub bound_refined: f64,
    pub r1: f64,
    /// `E[R_2(r, X̃) h(X̃, Q)]`.
    pub r2_expectation: f64,
}

/// `qbar_r = E q_r(X̃, Q)` for `1 <= r <= n/2`, with `X̃ = min(X, n)`.
pub fn cut_prob_mean(n: u64, r: u64, law: &CommunityLaw) -> Result<CutBound> {
    check_cut_range(n, r)?;
    let truncated = law.truncate(n)?;
    Ok(cut_bound_truncated(n, r, &truncated))
}

fn cut_bound_truncated(n: u64, r: u64, law: &CommunityLaw) -> CutBound {
    let atoms = law.atoms().expect("truncated laws are linear");
    let mut qbar = 0.0;
    let mut r2_expectation = 0.0;
    for a in atoms {
        qbar += a.weight * cut_prob_unchecked(n, r, a.size, a.density);
        r2_expectation += a.weight * r2_remainder(n, r, a.size) * h_unchecked(a.size, a.density);
    }
    let r1 = r1_remainder(n, r);
    let kappa = law.kappa();
    CutBound {
        r,
        qbar_exact: qbar.min(1.0),
        bound_simple: 1.0 - cut_scale(n, r) * law.alpha(),
        bound_refined: 1.0 - (r as f64 / n as f64 * kappa - r1 * law.mean_h() - r2_expectation),
        r1,
        r2_expectation,
    }
}

/// `eta_1 .. eta_4` for one layer law: probabilities that a fixed pair
/// `{u, v}` stays isolated in a layer of size at least two, split by how the
/// pair meets the layer's vertex set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Etas {
    /// Neither vertex in the layer.
    pub eta1: f64,
    /// Only `u` in the layer, and isolated there.
    pub eta2: f64,
    /// Only `v` in the layer, and isolated there; equals `eta2`.
    pub eta3: f64,
    /// Both in the layer, both isolated.
    pub eta4: f64,
}

fn etas_for(n: u64, law: &CommunityLaw) -> Etas {
    let atoms = law.atoms().expect("truncated laws are linear");
    let nn = falling2(n);
    let mut e = Etas {
        eta1: 0.0,
        eta2: 0.0,
        eta3: 0.0,
        eta4: 0.0,
    };
    for a in atoms.iter().filter(|a| a.size >= 2) {
        let x = a.size;
        let outside = (n - x) as f64;
        e.eta1 += a.weight * falling2(n - x) / nn;
        e.eta2 += a.weight * x as f64 * outside / nn * pow_complement(a.density, (x - 1) as f64);
        e.eta4 += a.weight * falling2(x) / nn * pow_complement(a.density, (2 * x - 3) as f64);
    }
    e.eta3 = e.eta2;
    e
}

/// `1 - q_k` for one layer law, assembled from `h`-type terms so that it
/// keeps relative precision when the layer rarely touches the pair.
fn pair_escape_complement(n: u64, law: &CommunityLaw) -> f64 {
    let atoms = law.atoms().expect("truncated laws are linear");
    let nn = falling2(n);
    atoms
        .iter()
        .filter(|a| a.size >= 2)
        .map(|a| {
            let x = a.size;
            let one_in = 2.0 * x as f64 * (n - x) as f64 * h_unchecked(x, a.density);
            let both_in = falling2(x) * one_minus_pow_complement(a.density, (2 * x - 3) as f64);
            a.weight * (one_in + both_in) / nn
        })
        .sum()
}

fn ln_one_minus(t: f64) -> f64 {
    if t >= 1.0 {
        f64::NEG_INFINITY
    } else {
        libm::log1p(-t)
    }
}

fn weighted_log(count: u64, ln_p: f64) -> f64 {
    if ln_p == 0.0 {
        0.0
    } else {
        count as f64 * ln_p
    }
}

/// First and second moments of the isolated-vertex count `N_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatedMoments {
    pub n: u64,
    pub m: u64,
    /// `P{vertex u isolated}`.
    pub p_single: f64,
    pub ln_p_single: f64,
    /// `P{u and v both isolated}`.
    pub p_pair: f64,
    pub ln_p_pair: f64,
    pub expected_n0: f64,
    pub var_n0: f64,
    /// Set when a slightly negative variance from round-off was clamped to 0.
    pub var_clamped: bool,
    /// For the last-evaluated layer law; `None` when there are no layers.
    pub etas: Option<Etas>,
    /// `P{X̃ <= 1} + eta1 + 2 eta2 + eta4` for that same law.
    pub q_pair_layer: Option<f64>,
}

fn ln_isolated_single(n: u64, groups: &[LayerGroup]) -> f64 {
    groups
        .iter()
        .map(|g| weighted_log(g.count, ln_one_minus(g.law.kappa() / n as f64)))
        .sum()
}

/// `P{I_u} = prod_k (1 - kappa~_k / n)`.
pub fn isolated_single(schedule: &LayerSchedule) -> Result<f64> {
    let n = schedule.n();
    if n < 2 {
        return Err(domain!("need n >= 2, got {n}"));
    }
    let groups = schedule.layer_groups()?;
    Ok(libm::exp(ln_isolated_single(n, &groups)))
}

/// `E N_0 = n P{I_u}`.
pub fn expected_isolated(schedule: &LayerSchedule) -> Result<f64> {
    Ok(schedule.n() as f64 * isolated_single(schedule)?)
}

/// Pair-isolation probability and the per-layer `eta` terms; the variance
/// fields are left at zero (see [`var_isolated`]).
pub fn isolated_pair(schedule: &LayerSchedule) -> Result<IsolatedMoments> {
    let n = schedule.n();
    if n < 3 {
        return Err(domain!("pair isolation needs n >= 3, got {n}"));
    }
    let groups = schedule.layer_groups()?;
    let ln_p_single = ln_isolated_single(n, &groups);
    let mut ln_p_pair = 0.0;
    let mut etas = None;
    let mut q_pair_layer = None;
    for g in &groups {
        ln_p_pair += weighted_log(g.count, ln_one_minus(pair_escape_complement(n, &g.law)));
        let e = etas_for(n, &g.law);
        q_pair_layer = Some(g.law.prob_at_most_one() + e.eta1 + e.eta2 + e.eta3 + e.eta4);
        etas = Some(e);
    }
    let p_single = libm::exp(ln_p_single);
    Ok(IsolatedMoments {
        n,
        m: schedule.m(),
        p_single,
        ln_p_single,
        p_pair: libm::exp(ln_p_pair),
        ln_p_pair,
        expected_n0: n as f64 * p_single,
        var_n0: 0.0,
        var_clamped: false,
        etas,
        q_pair_layer,
    })
}

/// `Var N_0 = n p (1 - p) + n (n - 1) (p_pair - p^2)`.
pub fn var_isolated(schedule: &LayerSchedule) -> Result<IsolatedMoments> {
    let mut moments = isolated_pair(schedule)?;
    let n = moments.n as f64;
    let p = moments.p_single;
    let covariance = if p == 0.0 {
        moments.p_pair
    } else {
        // p_pair - p^2 without cancellation.
        libm::exp(2.0 * moments.ln_p_single) * libm::expm1(moments.ln_p_pair - 2.0 * moments.ln_p_single)
    };
    let var = n * p * (1.0 - p) + n * (n - 1.0) * covariance;
    if var < -VARIANCE_TOLERANCE {
        return Err(Error::InternalConsistency(alloc::format!(
            "variance of N_0 came out as {var}; pair and single isolation probabilities disagree"
        )));
    }
    if var < 0.0 {
        moments.var_clamped = true;
        moments.var_n0 = 0.0;
    } else {
        moments.var_n0 = var;
    }
    Ok(moments)
}

/// One summand `C(n, r) prod_k qbar_r^[k]` of the union bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionTerm {
    pub r: u64,
    pub ln_term: f64,
    pub term: f64,
}

/// Union bound on the disconnection probability.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionBound {
    /// `S`; may be `+inf` when only `ln_s` is representable.
    pub s: f64,
    pub ln_s: f64,
    pub terms: Vec<UnionTerm>,
    /// The sum stops short of `floor(n/2)`; a partial sum does not bound
    /// the disconnection probability.
    pub partial: bool,
}

/// `S = sum_{1 <= r <= n/2} C(n, r) prod_k qbar_r^[k]`, optionally capped at
/// `r_max`. Refuses `n > UNION_BOUND_N_CAP` unless `allow_large` is set.
pub fn disconnect_union_bound(schedule: &LayerSchedule, r_max: Option<u64>, allow_large: bool) -> Result<UnionBound> {
    let n = schedule.n();
    if n < 2 {
        return Err(domain!("union bound needs n >= 2, got {n}"));
    }
    if n > UNION_BOUND_N_CAP && !allow_large {
        return Err(Error::Refused(alloc::format!(
            "union bound for n = {n} exceeds the cap of {UNION_BOUND_N_CAP}; pass the override to run it"
        )));
    }
    let half = n / 2;
    let upper = match r_max {
        Some(cap) if cap > half => return Err(domain!("r_max = {cap} exceeds floor(n/2) = {half}")),
        Some(cap) => cap,
        None => half,
    };
    let groups = schedule.layer_groups()?;
    let mut terms = Vec::with_capacity(upper as usize);
    for r in 1..=upper {
        let ln_product: f64 = groups
            .iter()
            .map(|g| weighted_log(g.count, libm::log(cut_bound_truncated(n, r, &g.law).qbar_exact)))
            .sum();
        let ln_term = ln_choose(n, r) + ln_product;
        terms.push(UnionTerm {
            r,
            ln_term,
            term: libm::exp(ln_term),
        });
    }
    let ln_s = log_sum_exp(terms.iter().map(|t| t.ln_term));
    Ok(UnionBound {
        s: libm::exp(ln_s),
        ln_s,
        terms,
        partial: upper < half,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::Atom;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cut_prob_examples() {
        assert!(close(cut_prob_exact(4, 2, 2, 1.0).unwrap(), 1.0 / 3.0, 1e-15));
        for (n, r, q) in [(4, 1, 0.3), (10, 7, 1.0), (1000, 500, 0.9)] {
            assert_eq!(cut_prob_exact(n, r, 1, q).unwrap(), 1.0);
            assert_eq!(cut_prob_exact(n, r, 0, q).unwrap(), 1.0);
        }
        // x = 2: 1 - 2 q r (n - r) / (n (n - 1)) = 1 - 7/30.
        assert!(close(cut_prob_exact(10, 3, 2, 0.5).unwrap(), 23.0 / 30.0, 1e-15));
        assert_eq!(cut_prob_exact(10, 5, 10, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cut_prob_domain_errors() {
        assert!(cut_prob_exact(4, 0, 2, 0.5).is_err());
        assert!(cut_prob_exact(4, 4, 2, 0.5).is_err());
        assert!(cut_prob_exact(4, 2, 5, 0.5).is_err());
        assert!(cut_prob_exact(1, 1, 1, 0.5).is_err());
        assert!(cut_prob_exact(4, 2, 2, 2.0).is_err());
    }

    #[test]
    fn cut_prob_mean_examples() {
        let law = CommunityLaw::degenerate(2, 1.0).unwrap();
        assert!(close(cut_prob_mean(4, 2, &law).unwrap().qbar_exact, 1.0 / 3.0, 1e-15));
        assert!(close(cut_prob_mean(4, 1, &law).unwrap().qbar_exact, 0.5, 1e-15));
        let small = CommunityLaw::new(vec![Atom::new(0, 1.0, 0.5), Atom::new(1, 0.4, 0.5)]).unwrap();
        let b = cut_prob_mean(20, 7, &small).unwrap();
        assert_eq!(b.qbar_exact, 1.0);
        assert!(b.bound_simple >= 1.0 && b.bound_refined >= 1.0);
        assert!(cut_prob_mean(4, 3, &law).is_err());
    }

    #[test]
    fn cut_bound_examples() {
        let b = cut_prob_bounds(100, 1, 2, 1.0).unwrap();
        assert!(close(b.bound_simple, 0.98, 1e-15));
        let b = cut_prob_bounds(10, 5, 10, 1.0).unwrap();
        assert!(b.bound_simple >= 0.0 && b.bound_refined >= 0.0);
        assert!(cut_prob_bounds(10, 2, 1, 1.0).is_err());
        assert!(cut_prob_bounds(10, 6, 3, 1.0).is_err());
        for r in 1..=50 {
            assert!(cut_prob_bounds(100, r, 2, 0.5).unwrap().r2 >= 0.0);
        }
    }

    #[test]
    fn isolated_single_examples() {
        let s = LayerSchedule::fixed(4, vec![(2, 1.0), (2, 1.0)]).unwrap();
        assert!(close(isolated_single(&s).unwrap(), 0.25, 1e-15));
        let deg = CommunityLaw::degenerate(2, 1.0).unwrap();
        let s = LayerSchedule::iid(10, deg.clone(), 0).unwrap();
        assert_eq!(isolated_single(&s).unwrap(), 1.0);
        assert_eq!(expected_isolated(&s).unwrap(), 10.0);
        let s = LayerSchedule::iid(10, deg, 5).unwrap();
        assert!(close(isolated_single(&s).unwrap(), 0.32768, 1e-14));
        assert!(close(expected_isolated(&s).unwrap(), 3.2768, 1e-13));
        let empty = LayerSchedule::iid(10, CommunityLaw::degenerate(0, 1.0).unwrap(), 7).unwrap();
        assert_eq!(expected_isolated(&empty).unwrap(), 10.0);
        let spanning = LayerSchedule::fixed(6, vec![(6, 1.0)]).unwrap();
        assert_eq!(isolated_single(&spanning).unwrap(), 0.0);
    }

    #[test]
    fn isolated_pair_examples() {
        let s = LayerSchedule::fixed(4, vec![(2, 1.0)]).unwrap();
        let m = isolated_pair(&s).unwrap();
        assert!(close(m.p_pair, 1.0 / 6.0, 1e-15));
        assert!(close(m.q_pair_layer.unwrap(), 1.0 / 6.0, 1e-15));
        let e = m.etas.unwrap();
        assert_eq!(e.eta2, e.eta3);
        let none = LayerSchedule::fixed(4, vec![]).unwrap();
        assert_eq!(isolated_pair(&none).unwrap().p_pair, 1.0);
        assert!(isolated_pair(&LayerSchedule::fixed(2, vec![]).unwrap()).is_err());
    }

    #[test]
    fn zero_density_layers_keep_pairs_isolated() {
        for n in [3u64, 10, 1000] {
            for x in 0..=n.min(40) {
                let s = LayerSchedule::fixed(n, vec![(x, 0.0)]).unwrap();
                let m = isolated_pair(&s).unwrap();
                assert!(close(m.q_pair_layer.unwrap(), 1.0, 1e-12), "n={n} x={x}");
                assert_eq!(m.p_pair, 1.0);
            }
        }
    }

    #[test]
    fn variance_examples() {
        let s = LayerSchedule::fixed(4, vec![]).unwrap();
        assert_eq!(var_isolated(&s).unwrap().var_n0, 0.0);
        // One 2-clique on 4 vertices leaves exactly two isolated vertices.
        let s = LayerSchedule::fixed(4, vec![(2, 1.0)]).unwrap();
        let m = var_isolated(&s).unwrap();
        assert!(m.var_n0.abs() < 1e-12);
        assert!(close(m.p_single, 0.5, 1e-15));
    }

    #[test]
    fn union_bound_examples() {
        let s = LayerSchedule::iid(4, CommunityLaw::degenerate(2, 1.0).unwrap(), 2).unwrap();
        let u = disconnect_union_bound(&s, None, false).unwrap();
        assert!(close(u.s, 5.0 / 3.0, 1e-14));
        assert!(!u.partial);
        assert_eq!(u.terms.len(), 2);

        let s = LayerSchedule::iid(9, CommunityLaw::degenerate(2, 1.0).unwrap(), 0).unwrap();
        let u = disconnect_union_bound(&s, None, false).unwrap();
        let expected: f64 = [9.0, 36.0, 84.0, 126.0].iter().sum();
        assert!(close(u.s, expected, 1e-10));

        let s = LayerSchedule::fixed(6, vec![(6, 1.0), (2, 0.5)]).unwrap();
        let u = disconnect_union_bound(&s, None, false).unwrap();
        assert!(u.terms.iter().all(|t| t.term == 0.0));
        assert_eq!(u.s, 0.0);

        let u = disconnect_union_bound(&s, Some(2), false).unwrap();
        assert!(u.partial);
        assert!(disconnect_union_bound(&s, Some(4), false).is_err());

        let big = LayerSchedule::iid(6000, CommunityLaw::degenerate(2, 1.0).unwrap(), 1).unwrap();
        assert_eq!(
            disconnect_union_bound(&big, Some(1), false).unwrap_err().code(),
            "refused"
        );
        assert!(disconnect_union_bound(&big, Some(1), true).is_ok());
    }
}
