//! Monte Carlo lifecycle simulation — the empirical counterpart of the
//! expected-value evaluator.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::order::OrderProfile;

use super::policy::{Policy, PolicyOutcome, SimError};

/// Empirical means over trials plus standard errors of those means.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloOutcome {
    /// Per-trial means, shaped like the exact evaluator's output.
    pub mean: PolicyOutcome,
    pub stderr_accepted: f64,
    pub stderr_canceled: f64,
    pub stderr_spend: f64,
    pub trials: u32,
    pub seed: u64,
}

/// Walk every order's lifecycle `trials` times.
///
/// Per stage one uniform draw resolves accept / cancel / survive; an
/// order surviving its final stage is force-canceled. Trials use
/// independent, deterministically derived RNG streams, so results are
/// reproducible from the seed and independent of evaluation order.
pub fn simulate(
    policy: &Policy,
    orders: &[OrderProfile],
    seed: u64,
    trials: u32,
) -> Result<MonteCarloOutcome, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    if orders.is_empty() {
        return Err(SimError::NoOrders);
    }
    // policies are deterministic per (order, stage); resolve plans once
    let plans: Vec<Vec<f64>> = orders
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let plan = policy.plan_for(o, i)?;
            o.validate_plan(&plan)?;
            Ok(plan.bonuses().to_vec())
        })
        .collect::<Result<_, SimError>>()?;
    let probs: Vec<Vec<(f64, f64)>> = orders
        .iter()
        .zip(&plans)
        .map(|(o, bonuses)| {
            bonuses
                .iter()
                .enumerate()
                .map(|(t, &c)| (o.curve(t).prob_unchecked(c), o.cancel_prob(t)))
                .collect()
        })
        .collect();

    let max_stages = orders.iter().map(|o| o.stage_count()).max().unwrap_or(0);
    let mut accepted_by_trial = Vec::with_capacity(trials as usize);
    let mut canceled_by_trial = Vec::with_capacity(trials as usize);
    let mut spend_by_trial = Vec::with_capacity(trials as usize);
    let mut per_stage_accepted = vec![0.0_f64; max_stages];
    let mut per_stage_spend = vec![0.0_f64; max_stages];

    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(trial) + 1);
        let mut accepted = 0u64;
        let mut canceled = 0u64;
        let mut spend = 0.0_f64;
        for (stage_probs, bonuses) in probs.iter().zip(&plans) {
            for (t, &(p, q)) in stage_probs.iter().enumerate() {
                let u: f64 = rng.random();
                if u < p {
                    accepted += 1;
                    spend += bonuses[t];
                    per_stage_accepted[t] += 1.0;
                    per_stage_spend[t] += bonuses[t];
                    break;
                }
                if u < p + q {
                    canceled += 1;
                    break;
                }
                // survive to the next stage; falling off the end is a
                // force-cancel and counts in neither tally
            }
        }
        accepted_by_trial.push(accepted as f64);
        canceled_by_trial.push(canceled as f64);
        spend_by_trial.push(spend);
    }

    let n = trials as f64;
    let mean = PolicyOutcome {
        orders: orders.len(),
        expected_accepted: accepted_by_trial.iter().sum::<f64>() / n,
        expected_canceled: canceled_by_trial.iter().sum::<f64>() / n,
        expected_spend: spend_by_trial.iter().sum::<f64>() / n,
        per_stage_accepted: per_stage_accepted.iter().map(|v| v / n).collect(),
        per_stage_spend: per_stage_spend.iter().map(|v| v / n).collect(),
    };
    Ok(MonteCarloOutcome {
        stderr_accepted: stderr_of_mean(&accepted_by_trial),
        stderr_canceled: stderr_of_mean(&canceled_by_trial),
        stderr_spend: stderr_of_mean(&spend_by_trial),
        mean,
        trials,
        seed,
    })
}

/// Standard error of the sample mean; zero for a single trial.
fn stderr_of_mean(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    libm::sqrt(var / n)
}
