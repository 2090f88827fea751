//! Independent oracles for the integration suites.
//!
//! Everything here recomputes results from first principles — outcome-path
//! enumeration and exhaustive grid search — and deliberately avoids the
//! library's telescoped sums and dual solver.

#![allow(dead_code)]

use msba_core::{OrderProfile, StageOrder, StagePlan};

pub mod strategies {
    //! Shared proptest generators for valid domain values.

    use msba_core::{AcceptanceCurve, OrderId, OrderProfile, StageOrder, StagePlan};
    use proptest::prelude::*;

    pub fn curve() -> impl Strategy<Value = AcceptanceCurve> {
        (-5.0_f64..-0.05, -6.0_f64..6.0)
            .prop_map(|(alpha, beta)| AcceptanceCurve::new(alpha, beta).unwrap())
    }

    pub fn cap() -> impl Strategy<Value = f64> {
        0.5_f64..6.0
    }

    pub fn stage_order() -> impl Strategy<Value = StageOrder> {
        (curve(), cap()).prop_map(|(c, cap)| StageOrder::new(c, cap).unwrap())
    }

    /// A valid order with `stages` stages: cancellation mass stays under
    /// the survival floor at the cap.
    pub fn order(stages: usize) -> impl Strategy<Value = OrderProfile> {
        (
            proptest::collection::vec((curve(), 0.0_f64..1.0), stages),
            cap(),
        )
            .prop_map(|(raw, cap)| {
                let curves: Vec<AcceptanceCurve> = raw.iter().map(|(c, _)| *c).collect();
                let cancels: Vec<f64> = raw
                    .iter()
                    .map(|(c, qfrac)| {
                        let p_at_cap = c.acceptance_prob(cap).unwrap();
                        (qfrac * 0.2).min((1.0 - p_at_cap) * 0.9)
                    })
                    .collect();
                OrderProfile::new(OrderId::from("prop"), curves, cancels, cap).unwrap()
            })
    }

    pub fn order_with_1_to_4_stages() -> impl Strategy<Value = OrderProfile> {
        (1_usize..=4).prop_flat_map(order)
    }

    /// A fraction-based plan for an order: each bonus in [0, cap].
    pub fn plan_fractions(max_stages: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0_f64..=1.0, max_stages)
    }

    pub fn plan_for(order: &OrderProfile, fractions: &[f64]) -> StagePlan {
        StagePlan::new(
            (0..order.stage_count())
                .map(|t| fractions[t % fractions.len()] * order.bonus_cap())
                .collect(),
        )
    }
}

/// Absorption probabilities of one lifecycle, summed over explicitly
/// enumerated outcome paths (absorb-at-stage-t by acceptance or
/// cancellation, or survive everything). Each path's probability is a
/// from-scratch product.
pub struct PathSums {
    pub accepted: f64,
    pub canceled: f64,
    pub forced: f64,
    pub spend: f64,
}

pub fn enumerate_paths(order: &OrderProfile, plan: &StagePlan) -> PathSums {
    let stages = order.stage_count();
    let p = |t: usize| {
        order
            .curve(t)
            .acceptance_prob(plan.bonuses()[t])
            .expect("finite bonus")
    };
    let q = |t: usize| order.cancel_prob(t);
    let mut sums = PathSums {
        accepted: 0.0,
        canceled: 0.0,
        forced: 0.0,
        spend: 0.0,
    };
    for t in 0..stages {
        let mut survive_prefix = 1.0;
        for s in 0..t {
            survive_prefix *= 1.0 - p(s) - q(s);
        }
        sums.accepted += survive_prefix * p(t);
        sums.spend += survive_prefix * p(t) * plan.bonuses()[t];
        sums.canceled += survive_prefix * q(t);
    }
    let mut all = 1.0;
    for s in 0..stages {
        all *= 1.0 - p(s) - q(s);
    }
    sums.forced = all;
    sums
}

/// All (spend, value) sums reachable by picking one option per set.
/// Caller keeps the cartesian product small.
pub fn cartesian_sums(option_sets: &[Vec<(f64, f64)>]) -> Vec<(f64, f64)> {
    let mut acc = vec![(0.0, 0.0)];
    for options in option_sets {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for &(s0, v0) in &acc {
            for &(s, v) in options {
                next.push((s0 + s, v0 + v));
            }
        }
        acc = next;
    }
    acc
}

/// Exact maximum of `value_a + value_b` subject to
/// `spend_a + spend_b <= budget`, by meet-in-the-middle.
fn combine_halves(mut a: Vec<(f64, f64)>, b: &[(f64, f64)], budget: f64) -> f64 {
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    // prefix maxima: best value at spend <= a[i].spend
    let mut best_by_spend = Vec::with_capacity(a.len());
    let mut running = f64::NEG_INFINITY;
    for &(_, v) in &a {
        running = running.max(v);
        best_by_spend.push(running);
    }
    let mut best = f64::NEG_INFINITY;
    for &(s, v) in b {
        let remaining = budget - s;
        if remaining < 0.0 {
            continue;
        }
        // last index with spend <= remaining
        let idx = a.partition_point(|&(sa, _)| sa <= remaining);
        if idx > 0 {
            best = best.max(v + best_by_spend[idx - 1]);
        }
    }
    best
}

/// Exhaustive constrained optimum over per-unit option sets: maximize the
/// summed value with the summed spend within budget. Exact on the given
/// options; `f64::NEG_INFINITY` if even the cheapest combination misses
/// the budget (cannot happen when every set contains a zero-spend option).
pub fn grid_joint_optimum(option_sets: &[Vec<(f64, f64)>], budget: f64) -> f64 {
    let mid = split_point(option_sets);
    let a = cartesian_sums(&option_sets[..mid]);
    let b = cartesian_sums(&option_sets[mid..]);
    combine_halves(a, &b, budget)
}

/// Split so the two cartesian products stay balanced.
fn split_point(option_sets: &[Vec<(f64, f64)>]) -> usize {
    let mut best = (usize::MAX, 1);
    for mid in 1..=option_sets.len() {
        let left: usize = option_sets[..mid].iter().map(|s| s.len().max(1)).product();
        let right: usize = option_sets[mid..].iter().map(|s| s.len().max(1)).product();
        let worst = left.max(right);
        if worst < best.0 {
            best = (worst, mid);
        }
    }
    best.1
}

/// Candidate bonuses `0, step, ..` up to the cap, cap included.
pub fn bonus_grid(step: f64, cap: f64) -> Vec<f64> {
    let mut values = vec![];
    let mut i = 0u32;
    loop {
        let v = f64::from(i) * step;
        if v > cap + 1e-12 {
            break;
        }
        values.push(v.min(cap));
        i += 1;
    }
    if cap - values.last().copied().unwrap_or(0.0) > 1e-12 {
        values.push(cap);
    }
    values
}

/// Single-stage options for one order: (expected spend, probability) at
/// each grid bonus.
pub fn stage_options(order: &StageOrder, step: f64) -> Vec<(f64, f64)> {
    bonus_grid(step, order.cap())
        .into_iter()
        .map(|c| {
            let p = order.curve().acceptance_prob(c).expect("finite bonus");
            (p * c, p)
        })
        .collect()
}

/// Exhaustive single-stage optimum over the bonus grid.
pub fn single_stage_grid_optimum(orders: &[StageOrder], budget: f64, step: f64) -> f64 {
    let option_sets: Vec<Vec<(f64, f64)>> =
        orders.iter().map(|o| stage_options(o, step)).collect();
    grid_joint_optimum(&option_sets, budget)
}

/// Every full plan for one order on the bonus grid, evaluated by path
/// enumeration: (lifecycle spend, lifecycle acceptance).
pub fn plan_options(order: &OrderProfile, step: f64) -> Vec<(f64, f64)> {
    let grid = bonus_grid(step, order.bonus_cap());
    let stages = order.stage_count();
    let mut plans: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..stages {
        let mut next = Vec::with_capacity(plans.len() * grid.len());
        for plan in &plans {
            for &c in &grid {
                let mut extended = plan.clone();
                extended.push(c);
                next.push(extended);
            }
        }
        plans = next;
    }
    plans
        .into_iter()
        .map(|bonuses| {
            let plan = StagePlan::new(bonuses);
            let sums = enumerate_paths(order, &plan);
            (sums.spend, sums.accepted)
        })
        .collect()
}

/// Exact brute-force optimum of the full multi-stage problem over the
/// bonus grid.
pub fn multi_stage_grid_optimum(orders: &[OrderProfile], budget: f64, step: f64) -> f64 {
    let option_sets: Vec<Vec<(f64, f64)>> =
        orders.iter().map(|o| plan_options(o, step)).collect();
    grid_joint_optimum(&option_sets, budget)
}
