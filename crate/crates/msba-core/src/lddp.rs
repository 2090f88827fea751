//! Offline training: dynamic programming over discretized budget levels.
//!
//! The multi-stage problem splits into (a) how much budget each stage
//! gets and (b) the single-stage allocation within a stage. Budgets are
//! discretized into integer money levels. For every (stage, level) cell
//! the single-stage dual is solved, giving the `g` and `lambda` tables;
//! a backward recursion then combines stages through the one-dimensional
//! survival-rate reduction
//!
//! ```text
//! G[t][b] = max over k of { g[t][k] + (N'/|N_t|) * G[t+1][floor(|N_t|/N' * (b-k))] }
//! N' = |N_t| - g[t][k] - Q[t]
//! ```
//!
//! and a final backtrack reads off the per-stage budget split and the
//! empirical multipliers `lambda*_t` that the online decision rule
//! consumes.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::order::OrderProfile;
use crate::single_stage::{StageDual, StageError, StageOrder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LddpError {
    #[error("dataset needs at least one stage")]
    NoStages,
    #[error("orders disagree on stage count: expected {expected}, found {found}")]
    MixedStageCounts { expected: usize, found: usize },
    #[error("survivor sets must shrink: stage {stage} has {count} orders, previous had {previous}")]
    GrowingSurvivorSet {
        stage: usize,
        count: usize,
        previous: usize,
    },
    #[error("stage {stage}: cancellation mass {q_sum} exceeds the set size {count}")]
    CancellationMassTooLarge {
        stage: usize,
        q_sum: f64,
        count: usize,
    },
    #[error("money unit must be finite and > 0, got {0}")]
    InvalidMoneyUnit(f64),
    #[error("tables cover {tables} stages but the dataset has {dataset}")]
    StageCountMismatch { tables: usize, dataset: usize },
    #[error(transparent)]
    Stage(#[from] StageError),
}

/// One stage's training inputs: the surviving orders (each as its
/// stage-local curve and cap) and the summed cancellation mass `Q_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageData {
    pub orders: Vec<StageOrder>,
    pub q_sum: f64,
}

/// Per-stage survivor sets for the whole horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDataset {
    stages: Vec<StageData>,
}

impl StageDataset {
    /// Validates that set sizes are non-increasing across stages and that
    /// each stage's cancellation mass fits inside its set.
    pub fn new(stages: Vec<StageData>) -> Result<Self, LddpError> {
        if stages.is_empty() {
            return Err(LddpError::NoStages);
        }
        let mut previous = usize::MAX;
        for (stage, data) in stages.iter().enumerate() {
            let count = data.orders.len();
            if count > previous {
                return Err(LddpError::GrowingSurvivorSet {
                    stage,
                    count,
                    previous,
                });
            }
            if !data.q_sum.is_finite() || data.q_sum < 0.0 || data.q_sum > count as f64 {
                return Err(LddpError::CancellationMassTooLarge {
                    stage,
                    q_sum: data.q_sum,
                    count,
                });
            }
            previous = count;
        }
        Ok(Self { stages })
    }

    /// Survivor sets under zero bonus, the training-set construction for
    /// synthetic instances.
    ///
    /// Stage 1 holds every order. For each later stage the expected
    /// survivor count is the sum of zero-bonus survival prefixes; the set
    /// keeps that many orders (rounded to nearest), choosing the highest
    /// survival probabilities among the previous stage's members so that
    /// the sets nest.
    pub fn zero_bonus_survivors(orders: &[OrderProfile]) -> Result<Self, LddpError> {
        if orders.is_empty() {
            return Err(LddpError::NoStages);
        }
        let horizon = orders[0].stage_count();
        for order in orders {
            if order.stage_count() != horizon {
                return Err(LddpError::MixedStageCounts {
                    expected: horizon,
                    found: order.stage_count(),
                });
            }
        }

        let mut members: Vec<usize> = (0..orders.len()).collect();
        // survival weight of each order at the start of the current stage
        let mut weights: Vec<f64> = vec![1.0; orders.len()];
        let mut stages = Vec::with_capacity(horizon);
        for t in 0..horizon {
            if t > 0 {
                let expected: f64 = members.iter().map(|&i| weights[i]).sum();
                let target = libm::round(expected).max(0.0) as usize;
                let keep = target.min(members.len());
                members.sort_by(|&a, &b| {
                    weights[b]
                        .partial_cmp(&weights[a])
                        .unwrap_or(core::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                members.truncate(keep);
                members.sort_unstable();
            }
            let mut stage_orders = Vec::with_capacity(members.len());
            let mut q_sum = 0.0;
            for &i in &members {
                let order = &orders[i];
                stage_orders.push(StageOrder::new(*order.curve(t), order.bonus_cap())?);
                q_sum += order.cancel_prob(t);
            }
            stages.push(StageData {
                orders: stage_orders,
                q_sum,
            });
            for &i in &members {
                let order = &orders[i];
                let p0 = order.curve(t).prob_unchecked(0.0);
                weights[i] *= (1.0 - p0 - order.cancel_prob(t)).max(0.0);
            }
        }
        Self::new(stages)
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[StageData] {
        &self.stages
    }

    pub fn stage(&self, t: usize) -> &StageData {
        &self.stages[t]
    }
}

/// How the backtrack carries the remaining budget between stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BacktrackMode {
    /// Subtract the stage budget directly, as in the pseudocode.
    #[default]
    Direct,
    /// Rescale the remainder by the survival ratio, mirroring the
    /// recursion's index transform.
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LddpConfig {
    /// Currency per money level.
    pub money_unit: f64,
    pub backtrack: BacktrackMode,
}

impl Default for LddpConfig {
    fn default() -> Self {
        Self {
            money_unit: 0.1,
            backtrack: BacktrackMode::Direct,
        }
    }
}

/// The four DP tables, indexed `[stage][money level]` with stages
/// 0-based and levels `0..=levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpTables {
    levels: usize,
    money_unit: f64,
    /// Single-stage optimum at each (stage, level).
    pub g: Vec<Vec<f64>>,
    /// Dual multiplier behind each `g` entry.
    pub lambda: Vec<Vec<f64>>,
    /// Value of running stages `t..` with the given budget.
    pub g_total: Vec<Vec<f64>>,
    /// Money levels given to stage `t` at each total; drives backtrack.
    pub split: Vec<Vec<usize>>,
}

impl DpTables {
    pub fn stage_count(&self) -> usize {
        self.g.len()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn money_unit(&self) -> f64 {
        self.money_unit
    }

    /// Optimal expected accepted count for the full horizon and budget.
    pub fn optimum(&self) -> f64 {
        self.g_total[0][self.levels]
    }
}

/// The offline handoff artifact: one multiplier and one budget share per
/// allocation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSchedule {
    pub lambdas: Vec<f64>,
    pub stage_budgets: Vec<usize>,
}

impl MultiplierSchedule {
    pub fn stage_count(&self) -> usize {
        self.lambdas.len()
    }
}

/// Builds the `g`/`lambda` rows for a dataset, keeping the per-stage
/// dual caches so that repeated builds (different budgets over the same
/// order pool, as the daily controller does) stay cheap.
pub struct TableBuilder<'a> {
    data: &'a StageDataset,
    duals: Vec<StageDual<'a>>,
}

impl<'a> TableBuilder<'a> {
    pub fn new(data: &'a StageDataset) -> Self {
        let duals = data.stages.iter().map(|s| StageDual::new(&s.orders)).collect();
        Self { data, duals }
    }

    /// Solve the single-stage problem at every (stage, level) cell.
    /// Empty survivor sets produce all-zero rows.
    pub fn build(&mut self, levels: usize, money_unit: f64) -> Result<DpTables, LddpError> {
        if !money_unit.is_finite() || money_unit <= 0.0 {
            return Err(LddpError::InvalidMoneyUnit(money_unit));
        }
        let stages = self.data.stage_count();
        let mut g = vec![vec![0.0; levels + 1]; stages];
        let mut lambda = vec![vec![0.0; levels + 1]; stages];
        for (t, dual) in self.duals.iter_mut().enumerate() {
            if self.data.stages[t].orders.is_empty() {
                continue;
            }
            for b in 0..=levels {
                let sol = dual.solve(b as f64 * money_unit)?;
                g[t][b] = sol.objective;
                lambda[t][b] = sol.lambda;
            }
        }
        Ok(DpTables {
            levels,
            money_unit,
            g,
            lambda,
            g_total: vec![vec![0.0; levels + 1]; stages],
            split: vec![vec![0; levels + 1]; stages],
        })
    }
}

/// Single-stage table pass; see [`TableBuilder`] for the reusable form.
pub fn build_stage_tables(
    data: &StageDataset,
    levels: usize,
    money_unit: f64,
) -> Result<DpTables, LddpError> {
    TableBuilder::new(data).build(levels, money_unit)
}

/// Backward recursion filling `g_total` and `split`.
///
/// The last stage simply spends what it is given (`G = g`, split = all of
/// it). Earlier stages scan every split point `k`; the future value is
/// looked up at the survival-rescaled index, floored and clamped into the
/// table. A non-positive projected survivor count contributes no future
/// term. Ties prefer the smallest `k`.
pub fn recurse(tables: &mut DpTables, data: &StageDataset) -> Result<(), LddpError> {
    let stages = tables.stage_count();
    if stages != data.stage_count() {
        return Err(LddpError::StageCountMismatch {
            tables: stages,
            dataset: data.stage_count(),
        });
    }
    let levels = tables.levels;
    let last = stages - 1;
    tables.g_total[last] = tables.g[last].clone();
    for b in 0..=levels {
        tables.split[last][b] = b;
    }
    for t in (0..last).rev() {
        let n_t = data.stages[t].orders.len() as f64;
        let q_t = data.stages[t].q_sum;
        for b in 0..=levels {
            let mut best = tables.g_total[t + 1][b];
            let mut best_k = 0usize;
            for k in 0..=b {
                let g_tk = tables.g[t][k];
                let survivors = n_t - g_tk - q_t;
                let candidate = if survivors > 0.0 {
                    let scaled = libm::floor(n_t / survivors * (b - k) as f64);
                    let idx = if scaled >= levels as f64 {
                        levels
                    } else {
                        scaled.max(0.0) as usize
                    };
                    g_tk + survivors / n_t * tables.g_total[t + 1][idx]
                } else {
                    g_tk
                };
                if candidate > best {
                    best = candidate;
                    best_k = k;
                }
            }
            tables.g_total[t][b] = best;
            tables.split[t][b] = best_k;
        }
    }
    Ok(())
}

/// Walk the split table from the full budget down, recording each
/// stage's multiplier at its allotted level.
pub fn backtrack(
    tables: &DpTables,
    data: &StageDataset,
    mode: BacktrackMode,
) -> MultiplierSchedule {
    let stages = tables.stage_count();
    let mut lambdas = Vec::with_capacity(stages);
    let mut stage_budgets = Vec::with_capacity(stages);
    let mut remaining = tables.levels;
    for t in 0..stages {
        let allotted = tables.split[t][remaining];
        lambdas.push(tables.lambda[t][allotted]);
        stage_budgets.push(allotted);
        remaining = match mode {
            BacktrackMode::Direct => remaining - allotted,
            BacktrackMode::Rescaled => {
                let n_t = data.stages[t].orders.len() as f64;
                let survivors = n_t - tables.g[t][allotted] - data.stages[t].q_sum;
                if survivors > 0.0 {
                    let scaled = libm::floor(n_t / survivors * (remaining - allotted) as f64);
                    if scaled >= tables.levels as f64 {
                        tables.levels
                    } else {
                        scaled.max(0.0) as usize
                    }
                } else {
                    0
                }
            }
        };
    }
    MultiplierSchedule {
        lambdas,
        stage_budgets,
    }
}

/// Full offline pass: stage tables, recursion, backtrack.
pub fn train(
    data: &StageDataset,
    levels: usize,
    config: &LddpConfig,
) -> Result<(DpTables, MultiplierSchedule), LddpError> {
    let mut tables = build_stage_tables(data, levels, config.money_unit)?;
    recurse(&mut tables, data)?;
    let schedule = backtrack(&tables, data, config.backtrack);
    Ok((tables, schedule))
}
