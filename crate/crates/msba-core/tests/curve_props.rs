//! Property suites for the acceptance-curve primitives.

mod common;

use common::strategies;
use msba_core::ProbBounds;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Strictly increasing in the bonus.
    #[test]
    fn acceptance_prob_monotone(
        curve in strategies::curve(),
        a in 0.0_f64..6.0,
        delta in 1e-6_f64..3.0,
    ) {
        let lo = curve.acceptance_prob(a).unwrap();
        let hi = curve.acceptance_prob(a + delta).unwrap();
        prop_assert!(hi > lo, "p({a}) = {lo}, p({}) = {hi}", a + delta);
        prop_assert!(lo > 0.0 && hi < 1.0);
    }

    /// inverse_bonus and acceptance_prob are mutual inverses.
    #[test]
    fn round_trip_identities(
        curve in strategies::curve(),
        p in 1e-6_f64..=0.999_999,
        bonus in 0.0_f64..6.0,
    ) {
        let c = curve.inverse_bonus(p).unwrap();
        let p_back = curve.acceptance_prob(c).unwrap();
        prop_assert!(
            (p_back - p).abs() <= 1e-9 * p,
            "p {p} -> c {c} -> p {p_back}"
        );

        let p2 = curve.acceptance_prob(bonus).unwrap();
        if p2 > 1e-12 && p2 < 1.0 - 1e-12 {
            let bonus_back = curve.inverse_bonus(p2).unwrap();
            let scale = 1.0_f64.max(bonus.abs());
            prop_assert!(
                (bonus_back - bonus).abs() <= 1e-9 * scale,
                "c {bonus} -> p {p2} -> c {bonus_back}"
            );
        }
    }

    /// The spend transform p * c(p) has non-negative discrete second
    /// differences over the probability box, i.e. it is convex there.
    #[test]
    fn spend_transform_convex(curve in strategies::curve(), cap in strategies::cap()) {
        let bounds = ProbBounds::for_cap(&curve, cap).unwrap();
        let (lo, hi) = (bounds.p_low(), bounds.p_high());
        prop_assume!(hi - lo > 1e-6);
        let g = |p: f64| p * curve.inverse_bonus(p).unwrap();
        let steps = 64;
        let h = (hi - lo) / steps as f64;
        for i in 1..steps {
            let p = lo + h * i as f64;
            let second = g(p - h) - 2.0 * g(p) + g(p + h);
            // tolerance scales with the curvature magnitudes involved
            let scale = g(p - h).abs().max(g(p + h).abs()).max(1.0);
            prop_assert!(
                second >= -1e-9 * scale,
                "second difference {second} at p = {p}"
            );
        }
    }
}
