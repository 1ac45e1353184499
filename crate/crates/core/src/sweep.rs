//! Choosing the layer count that realizes a target threshold value.

use crate::error::{domain, Result};
use crate::law::CommunityLaw;

/// Layer count for a target `lambda` and the value actually realized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MSolution {
    pub m: u64,
    pub lambda_target: f64,
    pub lambda_actual: f64,
    pub kappa_used: f64,
}

/// `m = round(n (ln n - lambda) / kappa)`, clamped at zero, with
/// `kappa` truncated at `n` when `truncated` is set.
pub fn solve_m_for_lambda(n: u64, law: &CommunityLaw, lambda_target: f64, truncated: bool) -> Result<MSolution> {
    if n < 2 {
        return Err(domain!("need n >= 2, got {n}"));
    }
    if !lambda_target.is_finite() {
        return Err(domain!("target lambda must be finite"));
    }
    if law.alpha() <= 0.0 {
        return Err(domain!(
            "degenerate law: E[Q 1{{X >= 2}}] = 0, so every layer has no edges almost surely and the graph is empty"
        ));
    }
    let kappa = if truncated { law.kappa_truncated(n) } else { law.kappa() };
    let ln_n = libm::log(n as f64);
    let raw = libm::round(n as f64 * (ln_n - lambda_target) / kappa).max(0.0);
    if raw.is_nan() || raw >= 9.0e15 {
        return Err(domain!("target lambda {lambda_target} needs about {raw:e} layers"));
    }
    let m = raw as u64;
    Ok(MSolution {
        m,
        lambda_target,
        lambda_actual: lambda_for(n, m, kappa),
        kappa_used: kappa,
    })
}

/// `ln n - (m / n) kappa`.
pub fn lambda_for(n: u64, m: u64, kappa: f64) -> f64 {
    let ln_n = libm::log(n as f64);
    if m == 0 {
        ln_n
    } else {
        ln_n - m as f64 / n as f64 * kappa
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_layers_at_ln_n() {
        let law = CommunityLaw::degenerate(2, 1.0).unwrap();
        let s = solve_m_for_lambda(100, &law, libm::log(100.0), false).unwrap();
        assert_eq!(s.m, 0);
    }

    #[test]
    fn large_graph_example() {
        let law = CommunityLaw::degenerate(3, 0.5).unwrap();
        let s = solve_m_for_lambda(5000, &law, -5.0, false).unwrap();
        assert_eq!(s.m, 30038);
        assert!((s.lambda_actual - (-5.0)).abs() <= 2.25 / 5000.0);
    }

    #[test]
    fn rounding_stays_within_one_layer() {
        let law = CommunityLaw::degenerate(2, 1e-6).unwrap();
        for target in [-50.0, -3.3, 0.0, 1.7] {
            let s = solve_m_for_lambda(1000, &law, target, false).unwrap();
            assert!((s.lambda_actual - target).abs() <= s.kappa_used / 1000.0);
        }
        let s = solve_m_for_lambda(1000, &law, 100.0, false).unwrap();
        assert_eq!(s.m, 0);
    }

    #[test]
    fn degenerate_law_is_rejected() {
        let law = CommunityLaw::degenerate(1, 1.0).unwrap();
        assert!(solve_m_for_lambda(100, &law, 0.0, false).is_err());
        let law = CommunityLaw::degenerate(5, 0.0).unwrap();
        assert_eq!(
            solve_m_for_lambda(100, &law, 0.0, false).unwrap_err().code(),
            "domain_error"
        );
    }
}
