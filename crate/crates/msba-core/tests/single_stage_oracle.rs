//! Single-stage dual solver: monotonicity, feasibility, dual optimality,
//! and equivalence against the exhaustive grid oracle.

mod common;

use common::strategies;
use msba_core::{solve, spend_at, StageProblem, LAMBDA_TOL};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Expected spend at the inner optimum is non-increasing in the
    /// multiplier (the bisection's foundation). The golden-section inner
    /// search has 1e-7 argument tolerance, hence the small slack.
    #[test]
    fn spend_monotone_in_lambda(
        orders in proptest::collection::vec(strategies::stage_order(), 1..5),
        l1 in 0.0_f64..20.0,
        dl in 0.01_f64..20.0,
    ) {
        let problem = StageProblem::new(orders, 1.0).unwrap();
        let s1 = spend_at(&problem, l1).unwrap();
        let s2 = spend_at(&problem, l1 + dl).unwrap();
        prop_assert!(s2 <= s1 + 1e-5, "spend({l1}) = {s1} < spend({}) = {s2}", l1 + dl);
    }

    /// Solutions never overshoot the budget beyond tolerance, and the
    /// reported objective is the sum of the per-order probabilities.
    #[test]
    fn solve_feasible(
        orders in proptest::collection::vec(strategies::stage_order(), 1..5),
        budget_frac in 0.0_f64..=1.2,
    ) {
        let spend_cap = spend_at(
            &StageProblem::new(orders.clone(), 0.0).unwrap(),
            0.0,
        ).unwrap();
        let budget = budget_frac * spend_cap;
        let problem = StageProblem::new(orders, budget).unwrap();
        let sol = solve(&problem).unwrap();
        prop_assert!(!sol.degenerate);
        prop_assert!(
            sol.spend <= budget * (1.0 + 1e-3) + 1e-9,
            "spend {} budget {budget}",
            sol.spend
        );
        let sum_p: f64 = sol.per_order.iter().map(|(p, _)| p).sum();
        prop_assert!((sol.objective - sum_p).abs() < 1e-9);
        for (i, &(p, c)) in sol.per_order.iter().enumerate() {
            let o = &problem.orders()[i];
            prop_assert!(c >= 0.0 && c <= o.cap() + 1e-12);
            prop_assert!(p >= o.bounds().p_low() - 1e-12 && p <= o.bounds().p_high() + 1e-12);
        }
    }

    /// Complementary-slackness proxy: either the multiplier is ~zero
    /// (constraint slack) or the budget is nearly exhausted.
    #[test]
    fn dual_optimality_proxy(
        orders in proptest::collection::vec(strategies::stage_order(), 1..5),
        budget_frac in 0.05_f64..=1.2,
    ) {
        let spend_cap = spend_at(
            &StageProblem::new(orders.clone(), 0.0).unwrap(),
            0.0,
        ).unwrap();
        prop_assume!(spend_cap > 1e-6);
        let budget = budget_frac * spend_cap;
        let problem = StageProblem::new(orders, budget).unwrap();
        let sol = solve(&problem).unwrap();
        prop_assert!(
            sol.lambda <= 2.0 * LAMBDA_TOL
                || sol.spend >= budget * (1.0 - 1e-2),
            "lambda {} spend {} budget {budget}",
            sol.lambda,
            sol.spend
        );
    }

    /// The dual solution dominates every grid-feasible allocation up to
    /// discretization (zero duality gap).
    #[test]
    fn dominates_grid_oracle(
        orders in proptest::collection::vec(strategies::stage_order(), 1..4),
        budget_frac in 0.05_f64..=1.0,
    ) {
        let spend_cap = spend_at(
            &StageProblem::new(orders.clone(), 0.0).unwrap(),
            0.0,
        ).unwrap();
        let budget = budget_frac * spend_cap;
        let oracle = common::single_stage_grid_optimum(&orders, budget, 0.1);
        let sol = solve(&StageProblem::new(orders, budget).unwrap()).unwrap();
        prop_assert!(
            sol.objective >= oracle * (1.0 - 0.01),
            "dual {} vs oracle {oracle}",
            sol.objective
        );
    }
}

/// Spot check with a tighter grid: three orders, step 0.01, small budget.
#[test]
fn three_orders_fine_grid() {
    use msba_core::{AcceptanceCurve, StageOrder};
    let orders = vec![
        StageOrder::new(AcceptanceCurve::new(-1.0, 1.0).unwrap(), 3.0).unwrap(),
        StageOrder::new(AcceptanceCurve::new(-0.5, -0.5).unwrap(), 2.0).unwrap(),
        StageOrder::new(AcceptanceCurve::new(-1.5, 2.0).unwrap(), 3.0).unwrap(),
    ];
    for budget in [0.2, 0.5, 1.0, 2.0] {
        let oracle = common::single_stage_grid_optimum(&orders, budget, 0.01);
        let sol = solve(&StageProblem::new(orders.clone(), budget).unwrap()).unwrap();
        assert!(
            sol.objective >= oracle * (1.0 - 0.01),
            "budget {budget}: dual {} vs oracle {oracle}",
            sol.objective
        );
        assert!(sol.spend <= budget + 0.1);
    }
}
