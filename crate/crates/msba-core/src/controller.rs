//! Periodic budget control.
//!
//! Two strategies keep realized spend near the monthly budget under
//! order-stream uncertainty: a daily retarget that re-derives the
//! offline training budget from the remaining money and the expected
//! future volume, and a realtime multiplier that scales displayed
//! bonuses down when the cumulative expenditure ratio runs past 110%
//! of pace and up below 90%.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::lddp::{backtrack, recurse, BacktrackMode, LddpError, StageDataset, TableBuilder};
use crate::online::{decide, BonusGrid, OnlineError};
use crate::sim::generator::{generate, sample_order, GeneratorConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("expected future order count must be > 0")]
    NoExpectedFutureOrders,
    #[error("adjustment params invalid: {0}")]
    InvalidParams(&'static str),
    #[error("demand profile has {len} entries for {days} days")]
    ProfileLengthMismatch { len: usize, days: u32 },
    #[error("paced run needs at least one day and a positive arrival rate")]
    InvalidRunConfig,
    #[error(transparent)]
    Lddp(#[from] LddpError),
    #[error(transparent)]
    Online(#[from] OnlineError),
}

/// Inputs to the daily retarget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacingState {
    pub month_budget: f64,
    pub spent_to_date: f64,
    /// Size of the trailing training window, in orders.
    pub orders_past_30d: u64,
    /// Forecast order volume for the rest of the month.
    pub expected_future_orders: u64,
    pub elapsed_days: u32,
    pub remaining_days: u32,
}

/// Training budget for today: remaining budget divided by the expected
/// future volume, scaled to the training window's size. Floored at zero
/// once the month is overspent.
pub fn retarget_daily(state: &PacingState) -> Result<f64, ControllerError> {
    if state.expected_future_orders == 0 {
        return Err(ControllerError::NoExpectedFutureOrders);
    }
    let remaining = (state.month_budget - state.spent_to_date).max(0.0);
    Ok(remaining / state.expected_future_orders as f64 * state.orders_past_30d as f64)
}

/// Realtime adjustment thresholds and gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustmentParams {
    pub high_ratio: f64,
    pub low_ratio: f64,
    pub gain_up: f64,
    pub gain_down: f64,
    pub multiplier_min: f64,
    pub multiplier_max: f64,
}

impl Default for AdjustmentParams {
    fn default() -> Self {
        Self {
            high_ratio: 1.10,
            low_ratio: 0.90,
            gain_up: 1.0,
            gain_down: 1.0,
            multiplier_min: 0.2,
            multiplier_max: 2.0,
        }
    }
}

impl AdjustmentParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.low_ratio < 1.0 && 1.0 < self.high_ratio) {
            return Err(ControllerError::InvalidParams(
                "need low_ratio < 1 < high_ratio",
            ));
        }
        if !(0.0 < self.multiplier_min
            && self.multiplier_min <= 1.0
            && 1.0 <= self.multiplier_max)
        {
            return Err(ControllerError::InvalidParams(
                "need 0 < multiplier_min <= 1 <= multiplier_max",
            ));
        }
        if self.gain_up <= 0.0 || self.gain_down <= 0.0 {
            return Err(ControllerError::InvalidParams("gains must be positive"));
        }
        Ok(())
    }
}

/// Bonus scaling for the current expenditure ratio: 1.0 inside the
/// band (edges inclusive), otherwise adjusted proportionally to the
/// deviation and clamped.
pub fn realtime_multiplier(spend_ratio: f64, params: &AdjustmentParams) -> f64 {
    let raw = if spend_ratio < params.low_ratio {
        1.0 + params.gain_up * (params.low_ratio - spend_ratio)
    } else if spend_ratio > params.high_ratio {
        1.0 - params.gain_down * (spend_ratio - params.high_ratio)
    } else {
        1.0
    };
    raw.clamp(params.multiplier_min, params.multiplier_max)
}

/// Closed-loop month simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PacedConfig {
    pub days: u32,
    pub month_budget: f64,
    /// Mean arrivals per day; also the controller's volume forecast.
    pub mean_daily_orders: f64,
    /// Actual per-day demand multipliers (empty means flat demand). The
    /// controller's forecast intentionally ignores these, so a shock
    /// shows up only through realized spend.
    pub demand_profile: Vec<f64>,
    /// Orders in the training pool standing in for the past-30d window.
    pub training_pool: usize,
    pub money_unit: f64,
    pub grid_step: f64,
    pub params: AdjustmentParams,
    pub generator: GeneratorConfig,
}

impl Default for PacedConfig {
    fn default() -> Self {
        let generator = GeneratorConfig {
            orders: 0, // per-day arrivals are sampled, not batch-generated
            stages: 4,
            ..GeneratorConfig::default()
        };
        Self {
            days: 30,
            month_budget: 600.0,
            mean_daily_orders: 100.0,
            demand_profile: Vec::new(),
            training_pool: 150,
            money_unit: 0.5,
            grid_step: 0.5,
            params: AdjustmentParams::default(),
            generator,
        }
    }
}

/// End-of-day snapshot of the pacing loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub day: u32,
    pub orders: u64,
    pub target_budget: f64,
    pub spend: f64,
    pub cumulative_spend: f64,
    /// Cumulative spend over the day-prorated budget.
    pub ratio: f64,
    pub multiplier: f64,
}

/// Replay a stochastic month: every day retargets the training budget,
/// retrains the multiplier schedule on the (fixed) training pool, prices
/// the day's sampled arrivals with the realtime multiplier applied to
/// each displayed bonus, and records a ledger row.
///
/// The expenditure ratio compares cumulative spend against the
/// whole-day-prorated budget, so the multiplier reacts within the day a
/// demand shock lands.
pub fn paced_run(cfg: &PacedConfig, seed: u64) -> Result<Vec<DayRecord>, ControllerError> {
    cfg.params.validate()?;
    if cfg.days == 0 || !(cfg.mean_daily_orders > 0.0) {
        return Err(ControllerError::InvalidRunConfig);
    }
    if !cfg.demand_profile.is_empty() && cfg.demand_profile.len() != cfg.days as usize {
        return Err(ControllerError::ProfileLengthMismatch {
            len: cfg.demand_profile.len(),
            days: cfg.days,
        });
    }

    let pool_cfg = GeneratorConfig {
        orders: cfg.training_pool,
        ..cfg.generator.clone()
    };
    let pool = generate(&pool_cfg, seed);
    let dataset = StageDataset::zero_bonus_survivors(&pool)?;
    let mut builder = TableBuilder::new(&dataset);

    let mut ledger = Vec::with_capacity(cfg.days as usize);
    let mut spent = 0.0_f64;
    let mut multiplier = 1.0_f64;
    for day in 0..cfg.days {
        let remaining_days = cfg.days - day;
        let expected_future =
            libm::round(cfg.mean_daily_orders * remaining_days as f64).max(1.0) as u64;
        let state = PacingState {
            month_budget: cfg.month_budget,
            spent_to_date: spent,
            orders_past_30d: cfg.training_pool as u64,
            expected_future_orders: expected_future,
            elapsed_days: day,
            remaining_days,
        };
        let target = retarget_daily(&state)?;
        let levels = libm::floor(target / cfg.money_unit).max(0.0) as usize;
        let mut tables = builder.build(levels, cfg.money_unit)?;
        recurse(&mut tables, &dataset)?;
        let schedule = backtrack(&tables, &dataset, BacktrackMode::Direct);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(day) + 1);
        let demand = cfg
            .demand_profile
            .get(day as usize)
            .copied()
            .unwrap_or(1.0);
        let rate = cfg.mean_daily_orders * demand;
        let arrivals = Poisson::new(rate)
            .map_err(|_| ControllerError::InvalidRunConfig)?
            .sample(&mut rng) as u64;

        let mut day_spend = 0.0_f64;
        let mut ratio = cumulative_ratio(cfg, day, spent);
        for j in 0..arrivals {
            let order = sample_order(&pool_cfg, &mut rng, u64::from(day) * 1_000_000 + j);
            let grid = BonusGrid::with_step(cfg.grid_step, order.bonus_cap())?;
            for t in 0..order.stage_count() {
                let lambda = schedule.lambdas[t];
                let decided = decide(order.curve(t), order.bonus_cap(), lambda, &grid, t)?;
                let bonus = (decided.bonus * multiplier).clamp(0.0, order.bonus_cap());
                let p = order.curve(t).prob_unchecked(bonus);
                let q = order.cancel_prob(t);
                let u: f64 = rng.random();
                if u < p {
                    day_spend += bonus;
                    break;
                }
                if u < p + q {
                    break;
                }
            }
            ratio = cumulative_ratio(cfg, day, spent + day_spend);
            multiplier = realtime_multiplier(ratio, &cfg.params);
        }
        spent += day_spend;
        ledger.push(DayRecord {
            day,
            orders: arrivals,
            target_budget: target,
            spend: day_spend,
            cumulative_spend: spent,
            ratio,
            multiplier,
        });
    }
    Ok(ledger)
}

/// Cumulative spend over the budget prorated through the end of the
/// current day.
fn cumulative_ratio(cfg: &PacedConfig, day: u32, spent: f64) -> f64 {
    let elapsed = f64::from(day + 1) / f64::from(cfg.days);
    let prorated = cfg.month_budget * elapsed;
    if prorated <= 0.0 {
        return 0.0;
    }
    spent / prorated
}
