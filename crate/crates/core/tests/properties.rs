use cag_core::exact::{cut_prob_exact, isolated_pair};
use cag_core::sim::coupling_monotonicity_check;
use cag_core::{h_value, Atom, CommunityLaw, LayerSchedule};
use proptest::prelude::*;

#[test]
fn h_is_monotone_and_bounded_on_grid() {
    let qs = [0.0, 1e-9, 1e-3, 0.5, 1.0];
    for &q in &qs {
        let mut prev = 0.0;
        for x in 0..=10_000u64 {
            let h = h_value(x, q).unwrap();
            assert!((0.0..=1.0).contains(&h));
            if q > 0.0 {
                assert!(h >= prev, "x={x} q={q}");
            }
            prev = h;
        }
    }
    for x in 2..=10_000u64 {
        let hs: Vec<f64> = qs.iter().map(|&q| h_value(x, q).unwrap()).collect();
        assert!(hs.windows(2).all(|w| w[0] <= w[1]), "x={x}");
    }
}

fn arb_atoms(min_size: u64) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec(
        (
            min_size..200u64,
            prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64],
            0.01..10.0f64,
        )
            .prop_map(|(x, q, w)| Atom::new(x, q, w)),
        1..8,
    )
}

proptest! {
    #[test]
    fn laws_are_normalized(atoms in arb_atoms(0)) {
        let law = CommunityLaw::new(atoms).unwrap();
        prop_assert!((law.weight_sum() - 1.0).abs() < 1e-12);
        let t = law.truncate(17).unwrap();
        prop_assert!((t.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_never_raises_kappa(atoms in arb_atoms(0), n in 1u64..300) {
        let law = CommunityLaw::new(atoms).unwrap();
        prop_assert!(law.kappa_truncated(n) <= law.kappa());
        prop_assert!(law.truncate(n).unwrap().kappa() <= law.kappa() * (1.0 + 1e-14));
    }

    #[test]
    fn log_moment_dominates_kappa_ln2(atoms in arb_atoms(1)) {
        let law = CommunityLaw::new(atoms).unwrap();
        prop_assert!(law.log_moment() >= law.kappa() * core::f64::consts::LN_2 * (1.0 - 1e-14));
    }

    #[test]
    fn cut_probability_is_symmetric_in_the_cut(n in 2u64..400, r_frac in 0.0..1.0f64, x_frac in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let r = 1 + ((n - 2) as f64 * r_frac) as u64;
        let x = (n as f64 * x_frac) as u64;
        let a = cut_prob_exact(n, r, x, q).unwrap();
        let b = cut_prob_exact(n, n - r, x, q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn cut_probability_is_monotone(n in 2u64..300, r_frac in 0.0..1.0f64, x_frac in 0.0..=1.0f64, q1 in 0.0..=1.0f64, q2 in 0.0..=1.0f64) {
        let r = 1 + ((n - 2) as f64 * r_frac) as u64;
        let x = 2 + ((n - 2) as f64 * x_frac) as u64;
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(cut_prob_exact(n, r, x, hi).unwrap() <= cut_prob_exact(n, r, x, lo).unwrap() + 1e-12);
        prop_assert!(cut_prob_exact(n, r, x, q1).unwrap() <= cut_prob_exact(n, r, 2, q1).unwrap() + 1e-12);
    }

    #[test]
    fn pair_isolation_is_rarer_than_single(n in 3u64..200, layers in prop::collection::vec((0u64..200, 0.0..=1.0f64), 0..20)) {
        let pairs: Vec<(u64, f64)> = layers.into_iter().map(|(x, q)| (x.min(n), q)).collect();
        let s = LayerSchedule::fixed(n, pairs).unwrap();
        let m = isolated_pair(&s).unwrap();
        prop_assert!(m.p_pair <= m.p_single + 1e-15);
        prop_assert!(m.p_single <= 1.0 && m.p_pair >= 0.0);
    }

    #[test]
    fn tiny_layers_make_isolation_independent(n in 3u64..500, layers in prop::collection::vec((0u64..=1, 0.0..=1.0f64), 0..20)) {
        let s = LayerSchedule::fixed(n, layers).unwrap();
        let m = isolated_pair(&s).unwrap();
        prop_assert!((m.p_pair - m.p_single * m.p_single).abs() < 1e-15);
    }
}

#[test]
fn coupling_holds_on_random_configurations() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(2024);
    for config in 0..50u64 {
        let n = rng.random_range(2..=200u64);
        let m = rng.random_range(2..=500u64);
        let atoms: Vec<Atom> = (0..rng.random_range(1..4))
            .map(|_| Atom::new(rng.random_range(0..=n), rng.random::<f64>(), rng.random_range(0.1..1.0)))
            .collect();
        let s = LayerSchedule::iid(n, CommunityLaw::new(atoms).unwrap(), m).unwrap();
        let report = coupling_monotonicity_check(&s, 3, config).unwrap();
        assert!(report.passed(), "config {config}: {:?}", report.violation);
        assert_eq!(report.prefixes_checked, 3 * m);
    }
}
