//! Bound calculators against direct recomputation.

use lipfit::bounds::{bound_report, minimal_fit_bound, sampled_covering_radius, slack_fit_bound, uniform_bound, BoundInputs};
use proptest::prelude::*;

proptest! {
    #[test]
    fn formulas_match_expanded_forms(l_f in 0.0f64..10.0, l_g in 0.0f64..10.0, h in 0.0f64..1.0, e in 0.0f64..0.1, eb in 0.0f64..0.1, rho in 0.0f64..2.0) {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1.0);
        prop_assert!(close(uniform_bound(l_f, l_g, h, eb, e).unwrap(), l_f * h + l_g * h + eb + e));
        prop_assert!(close(minimal_fit_bound(l_g, h, e).unwrap(), 2.0 * l_g * h + 2.0 * e));
        prop_assert!(close(slack_fit_bound(l_g, rho, h, e).unwrap(), 2.0 * l_g * h + rho * h + 2.0 * e));
        // The slack bound reduces to the minimal-fit bound at ρ = 0 and grows with ρ.
        prop_assert!(close(slack_fit_bound(l_g, 0.0, h, e).unwrap(), minimal_fit_bound(l_g, h, e).unwrap()));
        prop_assert!(slack_fit_bound(l_g, rho, h, e).unwrap() >= minimal_fit_bound(l_g, h, e).unwrap());
    }

    #[test]
    fn sampled_radius_shrinks_with_samples(n in 1usize..4, big_n in 10usize..100_000, k1 in 0.1f64..3.0, k2 in 1.0f64..10.0) {
        let a = sampled_covering_radius(n, big_n, 0.1, k1, k2).unwrap();
        let b = sampled_covering_radius(n, big_n * 10, 0.1, k1, k2).unwrap();
        prop_assert!(b < a);
    }
}

#[test]
fn negative_inputs_are_rejected() {
    assert!(uniform_bound(-1.0, 1.0, 0.1, 0.0, 0.0).is_err());
    assert!(minimal_fit_bound(1.0, f64::NAN, 0.0).is_err());
}

#[test]
fn report_uses_proxy_when_generator_constant_is_unknown() {
    let inputs = BoundInputs {
        l_g: None,
        l_data: Some(4.0),
        l_f: 5.0,
        h: 0.5,
        dist: None,
        eps_bar: 0.0,
        eps: 0.01,
        rho: 1.0,
        n: None,
        big_n: None,
        delta: None,
        k1: None,
        k2: None,
    };
    let r = bound_report(&inputs).unwrap();
    assert!(r.l_g_is_proxy);
    assert_eq!(r.l_g_used, 4.0);
    assert!(!r.caveats.is_empty());
    let minimal = r.bounds.iter().find(|b| b.name == "minimal_lipschitz").unwrap();
    assert!((minimal.value - 4.02).abs() < 1e-12);
}
