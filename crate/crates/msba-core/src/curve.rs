//! Logistic acceptance model.
//!
//! An order's per-stage acceptance probability responds to the displayed
//! bonus `c` as `p(c) = 1 / (1 + exp(alpha*c + beta))` with `alpha < 0`,
//! so more bonus always means a higher acceptance probability. The inverse
//! map `c(p)` is closed-form and is what the single-stage dual solver
//! actually optimizes over.

use thiserror::Error;

/// Cap on `alpha`: curves must satisfy `alpha <= -ALPHA_EPSILON`.
///
/// Keeps the inverse map well conditioned; a zero slope would make the
/// bonus-for-probability inversion divide by zero.
pub const ALPHA_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("alpha must be a finite value <= -{ALPHA_EPSILON:e}, got {0}")]
    InvalidAlpha(f64),
    #[error("beta must be finite, got {0}")]
    InvalidBeta(f64),
    #[error("bonus must be finite, got {0}")]
    NonFiniteBonus(f64),
    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("bonus cap must be finite and >= 0, got {0}")]
    InvalidCap(f64),
}

/// Per-order, per-stage logistic demand curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceCurve {
    alpha: f64,
    beta: f64,
}

impl AcceptanceCurve {
    /// Validates `alpha <= -ALPHA_EPSILON` and finiteness of both parameters.
    pub fn new(alpha: f64, beta: f64) -> Result<Self, CurveError> {
        if !alpha.is_finite() || alpha > -ALPHA_EPSILON {
            return Err(CurveError::InvalidAlpha(alpha));
        }
        if !beta.is_finite() {
            return Err(CurveError::InvalidBeta(beta));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Acceptance probability at a displayed bonus.
    ///
    /// Strictly increasing in `bonus`; always in (0, 1). Negative bonuses
    /// are accepted so that the inverse map round-trips below `p(0)`.
    pub fn acceptance_prob(&self, bonus: f64) -> Result<f64, CurveError> {
        if !bonus.is_finite() {
            return Err(CurveError::NonFiniteBonus(bonus));
        }
        Ok(self.prob_unchecked(bonus))
    }

    /// Bonus that achieves acceptance probability `p`.
    ///
    /// `c(p) = -beta/alpha + (ln(1-p) - ln p) / alpha`. The result may be
    /// negative when `p < p(0)`; callers clamp to their bonus box.
    pub fn inverse_bonus(&self, p: f64) -> Result<f64, CurveError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(CurveError::ProbabilityOutOfRange(p));
        }
        Ok(self.bonus_unchecked(p))
    }

    /// `acceptance_prob` without the finiteness check, for validated inputs.
    #[inline]
    pub(crate) fn prob_unchecked(&self, bonus: f64) -> f64 {
        1.0 / (1.0 + libm::exp(self.alpha * bonus + self.beta))
    }

    /// `inverse_bonus` without the range check, for p already in (0, 1).
    #[inline]
    pub(crate) fn bonus_unchecked(&self, p: f64) -> f64 {
        -self.beta / self.alpha + (libm::log(1.0 - p) - libm::log(p)) / self.alpha
    }
}

/// Image of the bonus box `[0, cap]` under the acceptance curve.
///
/// Because `alpha < 0` makes the curve increasing, the probability box is
/// exactly `[p(0), p(cap)]`; these are the bounds the single-stage inner
/// minimization runs over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbBounds {
    p_low: f64,
    p_high: f64,
}

impl ProbBounds {
    /// Bounds induced by a bonus cap.
    pub fn for_cap(curve: &AcceptanceCurve, cap: f64) -> Result<Self, CurveError> {
        if !cap.is_finite() || cap < 0.0 {
            return Err(CurveError::InvalidCap(cap));
        }
        Ok(Self {
            p_low: curve.prob_unchecked(0.0),
            p_high: curve.prob_unchecked(cap),
        })
    }

    pub fn p_low(&self) -> f64 {
        self.p_low
    }

    pub fn p_high(&self) -> f64 {
        self.p_high
    }
}
