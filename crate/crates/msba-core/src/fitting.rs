//! Data-side model fitting.
//!
//! Stands in for the learned models feeding the optimizer: a damped
//! Newton maximum-likelihood fit of the logistic curve parameters from
//! (bonus, accepted) observations, and histogram-binning calibration of
//! cancellation scores.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::curve::{AcceptanceCurve, ALPHA_EPSILON};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("observation set must be non-empty")]
    EmptySamples,
    #[error("bonus observations must be finite and >= 0, got {0}")]
    InvalidBonus(f64),
    #[error("need at least two distinct bonus levels to identify the slope")]
    Unidentifiable,
    #[error("degenerate fit (single outcome class or non-convergence); clamped fallback alpha={alpha}, beta={beta}", alpha = .fallback.alpha(), beta = .fallback.beta())]
    Degenerate { fallback: AcceptanceCurve },
    #[error("scores ({scores}) and labels ({labels}) differ in length")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("bin width must be in (0, 1], got {0}")]
    InvalidWidth(f64),
}

/// Acceptance observations for one segment (an opaque grouping of the
/// contextual features the optimizer never sees directly).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    segment: String,
    samples: Vec<(f64, bool)>,
}

impl ObservationSet {
    pub fn new(segment: impl Into<String>, samples: Vec<(f64, bool)>) -> Result<Self, FitError> {
        if samples.is_empty() {
            return Err(FitError::EmptySamples);
        }
        for &(bonus, _) in &samples {
            if !bonus.is_finite() || bonus < 0.0 {
                return Err(FitError::InvalidBonus(bonus));
            }
        }
        Ok(Self {
            segment: segment.into(),
            samples,
        })
    }

    pub fn segment(&self) -> &str {
        &self.segment
    }

    pub fn samples(&self) -> &[(f64, bool)] {
        &self.samples
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Binomial log-likelihood of `p(c) = 1/(1 + e^(a c + b))`.
fn log_likelihood(samples: &[(f64, bool)], a: f64, b: f64) -> f64 {
    let mut ll = 0.0;
    for &(c, accepted) in samples {
        let z = a * c + b;
        // ln p = -softplus(z), ln(1-p) = z - softplus(z)
        ll += if accepted { -softplus(z) } else { z - softplus(z) };
    }
    ll
}

fn clamped_fallback(a: f64, b: f64) -> AcceptanceCurve {
    let alpha = a.clamp(-50.0, -ALPHA_EPSILON);
    let beta = b.clamp(-50.0, 50.0);
    AcceptanceCurve::new(alpha, beta).expect("clamped parameters are valid")
}

/// Maximum-likelihood logistic fit.
///
/// Damped Newton on the two-parameter likelihood: full steps are halved
/// until the likelihood does not decrease, so the iteration ascends
/// monotonically. Converges when the per-sample gradient norm drops
/// below 1e-8; the slope is then projected to at most `-ALPHA_EPSILON`.
///
/// Identifiability requires two distinct bonus levels; a single outcome
/// class or a run that separates / fails to converge yields a
/// [`FitError::Degenerate`] carrying the clamped parameters reached.
pub fn fit_logistic(obs: &ObservationSet) -> Result<AcceptanceCurve, FitError> {
    let samples = &obs.samples;
    let first_bonus = samples[0].0;
    if samples.iter().all(|&(c, _)| c == first_bonus) {
        return Err(FitError::Unidentifiable);
    }
    let positives = samples.iter().filter(|&&(_, y)| y).count();
    if positives == 0 || positives == samples.len() {
        // likelihood is unbounded; report the empirical-rate intercept
        let rate = (positives as f64 + 0.5) / (samples.len() as f64 + 1.0);
        let fallback = clamped_fallback(-ALPHA_EPSILON, libm::log(1.0 / rate - 1.0));
        return Err(FitError::Degenerate { fallback });
    }

    let n = samples.len() as f64;
    let mut a = -0.5_f64;
    let mut b = 0.0_f64;
    let mut ll = log_likelihood(samples, a, b);
    let mut converged = false;
    for _ in 0..200 {
        // gradient and Hessian of the log-likelihood in (a, b)
        let mut ga = 0.0;
        let mut gb = 0.0;
        let mut haa = 0.0;
        let mut hab = 0.0;
        let mut hbb = 0.0;
        for &(c, accepted) in samples {
            let p = 1.0 / (1.0 + libm::exp(a * c + b));
            let y = if accepted { 1.0 } else { 0.0 };
            let r = p - y;
            ga += r * c;
            gb += r;
            let w = p * (1.0 - p);
            haa -= w * c * c;
            hab -= w * c;
            hbb -= w;
        }
        if libm::sqrt(ga * ga + gb * gb) / n <= 1e-8 {
            converged = true;
            break;
        }
        // Newton step: solve H d = g, move against d
        let det = haa * hbb - hab * hab;
        let (mut da, mut db) = if det.abs() > 1e-300 {
            ((hbb * ga - hab * gb) / det, (haa * gb - hab * ga) / det)
        } else {
            // singular curvature; fall back to a scaled ascent step
            (ga / n, gb / n)
        };
        da = -da;
        db = -db;
        let mut step = 1.0_f64;
        let mut improved = false;
        for _ in 0..40 {
            let trial = log_likelihood(samples, a + step * da, b + step * db);
            if trial >= ll - 1e-12 {
                a += step * da;
                b += step * db;
                ll = trial;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if !converged || a.abs() > 50.0 || b.abs() > 50.0 {
        return Err(FitError::Degenerate {
            fallback: clamped_fallback(a, b),
        });
    }
    Ok(clamped_fallback(a, b))
}

/// Histogram-binning calibration of probabilistic scores.
///
/// Bins of the given width partition [0, 1]; each stores its positive
/// rate. Empty bins inherit the nearest non-empty bin's rate (ties go to
/// the lower bin).
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    width: f64,
    rates: Vec<f64>,
    counts: Vec<u64>,
}

impl CalibrationTable {
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn bin_count(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn bin_index(&self, score: f64) -> usize {
        let idx = libm::floor(score / self.width) as usize;
        idx.min(self.rates.len() - 1)
    }

    /// Calibrated probability for a score: the containing bin's rate.
    pub fn apply(&self, score: f64) -> Result<f64, FitError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(FitError::ScoreOutOfRange(score));
        }
        Ok(self.rates[self.bin_index(score)])
    }
}

/// Build a calibration table from scores and boolean outcomes.
pub fn calibrate_bins(
    scores: &[f64],
    labels: &[bool],
    width: f64,
) -> Result<CalibrationTable, FitError> {
    if scores.len() != labels.len() {
        return Err(FitError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(FitError::EmptySamples);
    }
    if !width.is_finite() || width <= 0.0 || width > 1.0 {
        return Err(FitError::InvalidWidth(width));
    }
    let bins = libm::ceil(1.0 / width - 1e-9).max(1.0) as usize;
    let mut counts = vec![0u64; bins];
    let mut positives = vec![0u64; bins];
    for (&score, &label) in scores.iter().zip(labels) {
        if !(0.0..=1.0).contains(&score) {
            return Err(FitError::ScoreOutOfRange(score));
        }
        let idx = (libm::floor(score / width) as usize).min(bins - 1);
        counts[idx] += 1;
        if label {
            positives[idx] += 1;
        }
    }
    let mut rates = vec![0.0_f64; bins];
    for i in 0..bins {
        if counts[i] > 0 {
            rates[i] = positives[i] as f64 / counts[i] as f64;
        } else {
            // nearest non-empty bin, lower index on ties
            let mut best: Option<usize> = None;
            for j in 0..bins {
                if counts[j] == 0 {
                    continue;
                }
                let dist = i.abs_diff(j);
                match best {
                    Some(b) if i.abs_diff(b) <= dist => {}
                    _ => best = Some(j),
                }
            }
            let donor = best.expect("at least one non-empty bin");
            rates[i] = positives[donor] as f64 / counts[donor] as f64;
        }
    }
    Ok(CalibrationTable {
        width,
        rates,
        counts,
    })
}
