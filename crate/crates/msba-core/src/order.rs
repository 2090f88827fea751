//! Orders and their multi-stage lifecycle.
//!
//! An order carries one acceptance curve and one cancellation probability
//! per allocation stage plus a bonus cap. At each stage it is either
//! accepted (probability `p_t(c_t)`), canceled (`q_t`), or survives to the
//! next stage; whatever survives the final stage is force-canceled. The
//! expected-value compositions here telescope those survival products in
//! closed form.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::curve::{AcceptanceCurve, CurveError, ProbBounds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    #[error("order must have at least one stage")]
    NoStages,
    #[error("curves ({curves}) and cancel probabilities ({cancels}) differ in length")]
    LengthMismatch { curves: usize, cancels: usize },
    #[error("cancellation probability at stage {stage} must be in [0, 1), got {value}")]
    InvalidCancelProb { stage: usize, value: f64 },
    #[error(
        "stage {stage}: acceptance at the cap ({p_at_cap}) plus cancellation ({cancel}) exceeds 1"
    )]
    NegativeSurvival {
        stage: usize,
        p_at_cap: f64,
        cancel: f64,
    },
    #[error("plan has {plan} bonuses but the order has {stages} stages")]
    PlanLengthMismatch { plan: usize, stages: usize },
    #[error("bonus {bonus} at stage {stage} outside [0, {cap}]")]
    BonusOutsideCap { stage: usize, bonus: f64, cap: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Opaque order identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderId(pub String);

impl fmt::Display for OrderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for OrderId {
    fn from(s: &str) -> Self {
        Self(String::from(s))
    }
}

/// One order: per-stage demand curves, per-stage cancellation
/// probabilities, and the bonus cap shared by all stages.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderProfile {
    id: OrderId,
    curves: Vec<AcceptanceCurve>,
    cancel_probs: Vec<f64>,
    bonus_cap: f64,
}

impl OrderProfile {
    /// Validates stage alignment and that survival probabilities stay
    /// non-negative over the whole bonus box: `p_t(cap) + q_t <= 1` for
    /// every stage. Orders violating that are rejected outright rather
    /// than clamped, since clamping would corrupt the telescoped
    /// lifecycle sums downstream.
    pub fn new(
        id: OrderId,
        curves: Vec<AcceptanceCurve>,
        cancel_probs: Vec<f64>,
        bonus_cap: f64,
    ) -> Result<Self, OrderError> {
        if curves.is_empty() {
            return Err(OrderError::NoStages);
        }
        if curves.len() != cancel_probs.len() {
            return Err(OrderError::LengthMismatch {
                curves: curves.len(),
                cancels: cancel_probs.len(),
            });
        }
        if !bonus_cap.is_finite() || bonus_cap < 0.0 {
            return Err(OrderError::Curve(CurveError::InvalidCap(bonus_cap)));
        }
        for (stage, (curve, &q)) in curves.iter().zip(&cancel_probs).enumerate() {
            if !(0.0..1.0).contains(&q) {
                return Err(OrderError::InvalidCancelProb { stage, value: q });
            }
            // p is increasing in the bonus, so the cap is the worst case.
            let p_at_cap = curve.prob_unchecked(bonus_cap);
            if p_at_cap + q > 1.0 + 1e-12 {
                return Err(OrderError::NegativeSurvival {
                    stage,
                    p_at_cap,
                    cancel: q,
                });
            }
        }
        Ok(Self {
            id,
            curves,
            cancel_probs,
            bonus_cap,
        })
    }

    pub fn id(&self) -> &OrderId {
        &self.id
    }

    pub fn stage_count(&self) -> usize {
        self.curves.len()
    }

    pub fn curves(&self) -> &[AcceptanceCurve] {
        &self.curves
    }

    pub fn curve(&self, stage: usize) -> &AcceptanceCurve {
        &self.curves[stage]
    }

    pub fn cancel_probs(&self) -> &[f64] {
        &self.cancel_probs
    }

    pub fn cancel_prob(&self, stage: usize) -> f64 {
        self.cancel_probs[stage]
    }

    pub fn bonus_cap(&self) -> f64 {
        self.bonus_cap
    }

    /// Probability box `[p_t(0), p_t(cap)]` for one stage.
    pub fn bounds(&self, stage: usize) -> ProbBounds {
        // cap was validated at construction
        ProbBounds::for_cap(&self.curves[stage], self.bonus_cap).expect("validated cap")
    }

    /// Checks a plan against this order's stage count and bonus cap.
    pub fn validate_plan(&self, plan: &StagePlan) -> Result<(), OrderError> {
        if plan.len() != self.stage_count() {
            return Err(OrderError::PlanLengthMismatch {
                plan: plan.len(),
                stages: self.stage_count(),
            });
        }
        for (stage, &bonus) in plan.bonuses().iter().enumerate() {
            if !bonus.is_finite() || bonus < 0.0 || bonus > self.bonus_cap {
                return Err(OrderError::BonusOutsideCap {
                    stage,
                    bonus,
                    cap: self.bonus_cap,
                });
            }
        }
        Ok(())
    }

    /// Probability the order is accepted at some stage under `plan`:
    /// the sum over stages of (survival up to the stage) x (stage
    /// acceptance).
    pub fn lifecycle_accept_prob(&self, plan: &StagePlan) -> Result<f64, OrderError> {
        self.validate_plan(plan)?;
        let mut survival = 1.0;
        let mut accepted = 0.0;
        for (stage, &bonus) in plan.bonuses().iter().enumerate() {
            let p = self.curves[stage].prob_unchecked(bonus);
            accepted += survival * p;
            survival *= 1.0 - p - self.cancel_probs[stage];
        }
        Ok(accepted)
    }

    /// Expected payout under `plan`: bonuses are paid only on acceptance,
    /// so each stage contributes (survival) x p_t(c_t) x c_t.
    pub fn lifecycle_expected_spend(&self, plan: &StagePlan) -> Result<f64, OrderError> {
        self.validate_plan(plan)?;
        let mut survival = 1.0;
        let mut spend = 0.0;
        for (stage, &bonus) in plan.bonuses().iter().enumerate() {
            let p = self.curves[stage].prob_unchecked(bonus);
            spend += survival * p * bonus;
            survival *= 1.0 - p - self.cancel_probs[stage];
        }
        Ok(spend)
    }

    /// Full expected-value decomposition of one lifecycle pass; the
    /// simulator aggregates these.
    pub fn lifecycle_breakdown(&self, plan: &StagePlan) -> Result<LifecycleBreakdown, OrderError> {
        self.validate_plan(plan)?;
        let stages = self.stage_count();
        let mut per_stage_accepted = Vec::with_capacity(stages);
        let mut per_stage_spend = Vec::with_capacity(stages);
        let mut survival = 1.0;
        let mut canceled = 0.0;
        for (stage, &bonus) in plan.bonuses().iter().enumerate() {
            let p = self.curves[stage].prob_unchecked(bonus);
            let q = self.cancel_probs[stage];
            per_stage_accepted.push(survival * p);
            per_stage_spend.push(survival * p * bonus);
            canceled += survival * q;
            survival *= 1.0 - p - q;
        }
        Ok(LifecycleBreakdown {
            per_stage_accepted,
            per_stage_spend,
            canceled,
            // numeric drift can push the telescoped remainder fractionally
            // below zero when survival collapses to ~0
            force_canceled: survival.max(0.0),
        })
    }
}

/// Expected-value split of one order's lifecycle under a fixed plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleBreakdown {
    pub per_stage_accepted: Vec<f64>,
    pub per_stage_spend: Vec<f64>,
    /// In-stage (customer) cancellations.
    pub canceled: f64,
    /// Probability of surviving the final stage unaccepted.
    pub force_canceled: f64,
}

impl LifecycleBreakdown {
    pub fn accepted(&self) -> f64 {
        self.per_stage_accepted.iter().sum()
    }

    pub fn spend(&self) -> f64 {
        self.per_stage_spend.iter().sum()
    }
}

/// Per-stage bonus assignment for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan {
    bonuses: Vec<f64>,
}

impl StagePlan {
    pub fn new(bonuses: Vec<f64>) -> Self {
        Self { bonuses }
    }

    /// All-zero plan with the given stage count.
    pub fn zeros(stages: usize) -> Self {
        Self {
            bonuses: alloc::vec![0.0; stages],
        }
    }

    pub fn bonuses(&self) -> &[f64] {
        &self.bonuses
    }

    pub fn len(&self) -> usize {
        self.bonuses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonuses.is_empty()
    }
}
