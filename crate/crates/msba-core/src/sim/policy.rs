//! Bonus policies and exact expected-value evaluation.

use alloc::vec::Vec;

use thiserror::Error;

use crate::lddp::{LddpError, MultiplierSchedule};
use crate::online::{decide, BonusGrid, OnlineError};
use crate::order::{OrderError, OrderProfile, StagePlan};
use crate::single_stage::StageError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("fixed policy has no plan for order index {0}")]
    MissingPlan(usize),
    #[error("unified bonus must be finite and >= 0, got {0}")]
    InvalidUnifiedBonus(f64),
    #[error("order has {order_stages} stages but the schedule covers {schedule_stages}")]
    ScheduleTooShort {
        order_stages: usize,
        schedule_stages: usize,
    },
    #[error("budget must be finite and >= 0, got {0}")]
    InvalidBudget(f64),
    #[error("Monte Carlo needs at least one trial")]
    NoTrials,
    #[error("no orders to evaluate")]
    NoOrders,
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Lddp(#[from] LddpError),
    #[error(transparent)]
    Stage(#[from] StageError),
}

/// A deterministic bonus rule: (order, stage) -> bonus.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// Baseline: never pay anything.
    NoBonus,
    /// One flat bonus for every order at every stage, clamped to caps.
    Unified { bonus: f64 },
    /// One shared multiplier applied at every stage — allocation without
    /// cross-stage planning.
    SingleStage { lambda: f64, grid_step: f64 },
    /// Per-stage multipliers from the offline dynamic program.
    Msba {
        schedule: MultiplierSchedule,
        grid_step: f64,
    },
    /// Explicit per-order plans, by order position.
    Fixed { plans: Vec<StagePlan> },
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::NoBonus => "no_bonus",
            Policy::Unified { .. } => "unified",
            Policy::SingleStage { .. } => "single_stage",
            Policy::Msba { .. } => "msba",
            Policy::Fixed { .. } => "fixed",
        }
    }

    /// Resolve the full per-stage plan for one order.
    pub fn plan_for(&self, order: &OrderProfile, index: usize) -> Result<StagePlan, SimError> {
        let stages = order.stage_count();
        match self {
            Policy::NoBonus => Ok(StagePlan::zeros(stages)),
            Policy::Unified { bonus } => {
                if !bonus.is_finite() || *bonus < 0.0 {
                    return Err(SimError::InvalidUnifiedBonus(*bonus));
                }
                Ok(StagePlan::new(alloc::vec![
                    bonus.min(order.bonus_cap());
                    stages
                ]))
            }
            Policy::SingleStage { lambda, grid_step } => {
                let grid = BonusGrid::with_step(*grid_step, order.bonus_cap())?;
                let mut bonuses = Vec::with_capacity(stages);
                for t in 0..stages {
                    bonuses.push(decide(order.curve(t), order.bonus_cap(), *lambda, &grid, t)?.bonus);
                }
                Ok(StagePlan::new(bonuses))
            }
            Policy::Msba {
                schedule,
                grid_step,
            } => {
                if stages > schedule.stage_count() {
                    return Err(SimError::ScheduleTooShort {
                        order_stages: stages,
                        schedule_stages: schedule.stage_count(),
                    });
                }
                let grid = BonusGrid::with_step(*grid_step, order.bonus_cap())?;
                let mut bonuses = Vec::with_capacity(stages);
                for t in 0..stages {
                    let lambda = schedule.lambdas[t];
                    bonuses.push(decide(order.curve(t), order.bonus_cap(), lambda, &grid, t)?.bonus);
                }
                Ok(StagePlan::new(bonuses))
            }
            Policy::Fixed { plans } => plans
                .get(index)
                .cloned()
                .ok_or(SimError::MissingPlan(index)),
        }
    }
}

/// Expected-value evaluation record for one policy over one order set.
///
/// `expected_canceled` counts in-stage (customer) cancellations only;
/// orders that survive the horizon unaccepted are force-canceled and are
/// reported through [`PolicyOutcome::expected_force_canceled`]. Reports
/// that mirror the platform's NA-canceled metric should use
/// [`PolicyOutcome::expected_total_canceled`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutcome {
    pub orders: usize,
    pub expected_accepted: f64,
    pub expected_canceled: f64,
    pub expected_spend: f64,
    pub per_stage_accepted: Vec<f64>,
    pub per_stage_spend: Vec<f64>,
}

impl PolicyOutcome {
    pub fn expected_force_canceled(&self) -> f64 {
        (self.orders as f64 - self.expected_accepted - self.expected_canceled).max(0.0)
    }

    pub fn expected_total_canceled(&self) -> f64 {
        self.expected_canceled + self.expected_force_canceled()
    }
}

/// Closed-form evaluation of a policy: telescoped lifecycle sums per
/// order, aggregated. Deterministic.
pub fn evaluate_expected(
    policy: &Policy,
    orders: &[OrderProfile],
) -> Result<PolicyOutcome, SimError> {
    if orders.is_empty() {
        return Err(SimError::NoOrders);
    }
    let max_stages = orders.iter().map(|o| o.stage_count()).max().unwrap_or(0);
    let mut outcome = PolicyOutcome {
        orders: orders.len(),
        expected_accepted: 0.0,
        expected_canceled: 0.0,
        expected_spend: 0.0,
        per_stage_accepted: alloc::vec![0.0; max_stages],
        per_stage_spend: alloc::vec![0.0; max_stages],
    };
    for (index, order) in orders.iter().enumerate() {
        let plan = policy.plan_for(order, index)?;
        let breakdown = order.lifecycle_breakdown(&plan)?;
        outcome.expected_accepted += breakdown.accepted();
        outcome.expected_canceled += breakdown.canceled;
        outcome.expected_spend += breakdown.spend();
        for (t, (&acc, &spend)) in breakdown
            .per_stage_accepted
            .iter()
            .zip(&breakdown.per_stage_spend)
            .enumerate()
        {
            outcome.per_stage_accepted[t] += acc;
            outcome.per_stage_spend[t] += spend;
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::AcceptanceCurve;
    use crate::order::OrderId;
    use alloc::vec;

    fn flat(p: f64) -> AcceptanceCurve {
        AcceptanceCurve::new(-1e-6, libm::log(1.0 / p - 1.0)).unwrap()
    }

    #[test]
    fn no_bonus_single_stage_order() {
        let order = OrderProfile::new(
            OrderId::from("o"),
            vec![flat(0.4)],
            vec![0.0],
            2.0,
        )
        .unwrap();
        let out = evaluate_expected(&Policy::NoBonus, &[order]).unwrap();
        assert!((out.expected_accepted - 0.4).abs() < 1e-9);
        assert_eq!(out.expected_spend, 0.0);
        assert!((out.expected_force_canceled() - 0.6).abs() < 1e-9);
    }

    #[test]
    fn fixed_plan_matches_core_example() {
        // two stages, p = 0.5 each, q1 = 0.1, bonuses (1, 2)
        let order = OrderProfile::new(
            OrderId::from("o"),
            vec![flat(0.5), flat(0.5)],
            vec![0.1, 0.0],
            4.0,
        )
        .unwrap();
        let policy = Policy::Fixed {
            plans: vec![StagePlan::new(vec![1.0, 2.0])],
        };
        let out = evaluate_expected(&policy, &[order]).unwrap();
        assert!((out.expected_accepted - 0.70).abs() < 1e-6);
        assert!((out.expected_spend - 0.9).abs() < 1e-5);
        // per-stage sums match the totals
        let acc: f64 = out.per_stage_accepted.iter().sum();
        let spend: f64 = out.per_stage_spend.iter().sum();
        assert!((acc - out.expected_accepted).abs() < 1e-9);
        assert!((spend - out.expected_spend).abs() < 1e-9);
    }

    #[test]
    fn unified_zero_equals_no_bonus() {
        let orders: Vec<OrderProfile> = (0..10)
            .map(|i| {
                OrderProfile::new(
                    OrderId(alloc::format!("o{i}")),
                    vec![
                        AcceptanceCurve::new(-1.0, -1.0 + 0.3 * i as f64).unwrap(),
                        AcceptanceCurve::new(-1.0, -0.5 + 0.3 * i as f64).unwrap(),
                    ],
                    vec![0.01, 0.02],
                    3.0,
                )
                .unwrap()
            })
            .collect();
        let a = evaluate_expected(&Policy::Unified { bonus: 0.0 }, &orders).unwrap();
        let b = evaluate_expected(&Policy::NoBonus, &orders).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_policy_needs_a_plan_per_order() {
        let order = OrderProfile::new(OrderId::from("o"), vec![flat(0.4)], vec![0.0], 2.0).unwrap();
        let policy = Policy::Fixed { plans: vec![] };
        assert!(matches!(
            evaluate_expected(&policy, &[order]),
            Err(SimError::MissingPlan(0))
        ));
    }
}
