//! Online per-order bonus decision.
//!
//! With the offline multipliers in hand, pricing one order at stage `t`
//! is a one-dimensional minimization of `lambda*_t * p(c) * c - p(c)`
//! over a fixed finite set of candidate bonuses, so each decision costs
//! a constant number of curve evaluations regardless of how many orders
//! or stages the instance has.

use alloc::vec::Vec;

use thiserror::Error;

use crate::curve::AcceptanceCurve;
use crate::lddp::MultiplierSchedule;
use crate::order::OrderProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OnlineError {
    #[error("bonus grid must be non-empty")]
    EmptyGrid,
    #[error("bonus grid must start at 0, be strictly ascending, and stay finite")]
    MalformedGrid,
    #[error("grid maximum {grid_max} exceeds the bonus cap {cap}")]
    GridExceedsCap { grid_max: f64, cap: f64 },
    #[error("grid step must be finite and > 0, got {0}")]
    InvalidStep(f64),
    #[error("multiplier must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("stage {stage} outside the schedule of {stages} stages")]
    StageOutOfRange { stage: usize, stages: usize },
    #[error("stage {stage} outside order {order} with {stages} stages")]
    OrderStageOutOfRange {
        order: usize,
        stage: usize,
        stages: usize,
    },
}

/// Ascending candidate bonuses, starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BonusGrid {
    values: Vec<f64>,
}

impl BonusGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, OnlineError> {
        if values.is_empty() {
            return Err(OnlineError::EmptyGrid);
        }
        if values[0] != 0.0 {
            return Err(OnlineError::MalformedGrid);
        }
        for pair in values.windows(2) {
            if !pair[1].is_finite() || pair[1] <= pair[0] {
                return Err(OnlineError::MalformedGrid);
            }
        }
        Ok(Self { values })
    }

    /// Uniform grid `0, step, 2*step, ...` up to the cap, with the cap
    /// itself appended when it is not a multiple of the step.
    pub fn with_step(step: f64, cap: f64) -> Result<Self, OnlineError> {
        if !step.is_finite() || step <= 0.0 {
            return Err(OnlineError::InvalidStep(step));
        }
        if !cap.is_finite() || cap < 0.0 {
            return Err(OnlineError::MalformedGrid);
        }
        let mut values = Vec::new();
        let mut i = 0u32;
        loop {
            let v = f64::from(i) * step;
            if v > cap + 1e-12 {
                break;
            }
            values.push(v.min(cap));
            i += 1;
        }
        if let Some(&last) = values.last() {
            if cap - last > 1e-12 {
                values.push(cap);
            }
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("grid is non-empty")
    }
}

/// A resolved bonus for one order at one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub bonus: f64,
    /// `lambda * p(c) * c - p(c)` at the chosen point.
    pub objective_value: f64,
    pub stage: usize,
}

/// One exhaustive pass over the grid; exposed separately so tests can
/// assert the work done is exactly the grid size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScan {
    pub best_index: usize,
    pub best_value: f64,
    pub evaluations: usize,
}

/// Evaluate the online objective at every grid point and keep the
/// minimizer; ties go to the smaller bonus.
pub fn scan_grid(curve: &AcceptanceCurve, lambda: f64, grid: &BonusGrid) -> GridScan {
    let mut best_index = 0;
    let mut best_value = f64::INFINITY;
    for (i, &c) in grid.values.iter().enumerate() {
        let p = curve.prob_unchecked(c);
        let value = lambda * p * c - p;
        if value < best_value {
            best_value = value;
            best_index = i;
        }
    }
    GridScan {
        best_index,
        best_value,
        evaluations: grid.values.len(),
    }
}

/// Price one order at one stage.
pub fn decide(
    curve: &AcceptanceCurve,
    cap: f64,
    lambda: f64,
    grid: &BonusGrid,
    stage: usize,
) -> Result<Decision, OnlineError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(OnlineError::InvalidLambda(lambda));
    }
    if grid.max() > cap + 1e-12 {
        return Err(OnlineError::GridExceedsCap {
            grid_max: grid.max(),
            cap,
        });
    }
    let scan = scan_grid(curve, lambda, grid);
    Ok(Decision {
        bonus: grid.values[scan.best_index],
        objective_value: scan.best_value,
        stage,
    })
}

/// Price a batch of orders that are all at stage `stage` (0-based),
/// using the schedule's multiplier for that stage and a per-order grid
/// built from `grid_step` and each order's cap. The problems are
/// separable, so the result for one order never depends on the others.
pub fn decide_batch(
    orders: &[OrderProfile],
    stage: usize,
    schedule: &MultiplierSchedule,
    grid_step: f64,
) -> Result<Vec<Decision>, OnlineError> {
    if stage >= schedule.stage_count() {
        return Err(OnlineError::StageOutOfRange {
            stage,
            stages: schedule.stage_count(),
        });
    }
    let lambda = schedule.lambdas[stage];
    let mut decisions = Vec::with_capacity(orders.len());
    for (index, order) in orders.iter().enumerate() {
        if stage >= order.stage_count() {
            return Err(OnlineError::OrderStageOutOfRange {
                order: index,
                stage,
                stages: order.stage_count(),
            });
        }
        let grid = BonusGrid::with_step(grid_step, order.bonus_cap())?;
        decisions.push(decide(
            order.curve(stage),
            order.bonus_cap(),
            lambda,
            &grid,
            stage,
        )?);
    }
    Ok(decisions)
}
