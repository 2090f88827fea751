//! Synthetic instance generation.
//!
//! There is no real order data here; instances are drawn from simple
//! parametric families chosen so the offline comparisons have signal.
//! Order quality persists across stages (a per-order base intercept with
//! a small upward stage drift), because independent per-stage draws make
//! almost every order get accepted somewhere in an 8-stage horizon and
//! leave nothing for the allocator to do.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::AcceptanceCurve;
use crate::order::{OrderId, OrderProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub orders: usize,
    pub stages: usize,
    /// Per-order slope range (negative).
    pub alpha_range: (f64, f64),
    /// Per-order base intercept range.
    pub beta_range: (f64, f64),
    /// Added to the intercept per stage: acceptance decays over the
    /// lifecycle.
    pub beta_stage_drift: f64,
    /// Uniform intercept noise per stage.
    pub beta_stage_jitter: f64,
    /// Upper end of the per-stage cancellation draw.
    pub max_cancel: f64,
    /// Bonus caps sampled uniformly.
    pub caps: Vec<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            orders: 2500,
            stages: 8,
            alpha_range: (-2.0, -0.2),
            beta_range: (-3.0, 3.0),
            beta_stage_drift: 0.15,
            beta_stage_jitter: 0.3,
            max_cancel: 0.05,
            caps: alloc::vec![3.0, 4.0, 5.0],
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draw one order. The cancellation draw is capped just under the
/// remaining survival mass at the bonus cap so every generated order
/// passes profile validation.
pub fn sample_order(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng, index: u64) -> OrderProfile {
    let alpha = uniform(rng, cfg.alpha_range.0, cfg.alpha_range.1);
    let beta_base = uniform(rng, cfg.beta_range.0, cfg.beta_range.1);
    let cap = cfg.caps[rng.random_range(0..cfg.caps.len())];
    let mut curves = Vec::with_capacity(cfg.stages);
    let mut cancels = Vec::with_capacity(cfg.stages);
    for t in 0..cfg.stages {
        let jitter = uniform(rng, -cfg.beta_stage_jitter, cfg.beta_stage_jitter);
        let beta = beta_base + cfg.beta_stage_drift * t as f64 + jitter;
        let curve = AcceptanceCurve::new(alpha, beta).expect("alpha range is negative");
        let p_at_cap = curve.acceptance_prob(cap).expect("finite cap");
        let q_raw = uniform(rng, 0.0, cfg.max_cancel);
        let q = q_raw.min(((1.0 - p_at_cap) * 0.999).max(0.0));
        curves.push(curve);
        cancels.push(q);
    }
    OrderProfile::new(OrderId(format!("o{index:06}")), curves, cancels, cap)
        .expect("generated orders are valid by construction")
}

/// Deterministic synthetic instance.
pub fn generate(cfg: &GeneratorConfig, seed: u64) -> Vec<OrderProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cfg.orders)
        .map(|i| sample_order(cfg, &mut rng, i as u64))
        .collect()
}

/// One latent order used by the stage-count sweep.
#[derive(Debug, Clone, Copy)]
struct Latent {
    alpha: f64,
    /// Whole-lifecycle zero-bonus acceptance probability.
    accept_total: f64,
    /// Whole-lifecycle customer-cancellation probability.
    cancel_total: f64,
    cap: f64,
}

/// Instances over several stage counts that share one underlying
/// lifecycle per order.
///
/// For each order the zero-bonus absorption totals (accepted, canceled,
/// force-canceled) are held exactly fixed across stage counts: with
/// per-stage survival `r = r1^(1/k)`, acceptance `p_k = (1-r) * a` and
/// cancellation `q_k = (1-r) * (1-a)` where `a` is the accept share,
/// every partition telescopes to the same totals. More stages therefore
/// means strictly finer control of the same process, which is the
/// comparison the stage-count sweep needs.
pub fn generate_repartitioned(
    cfg: &GeneratorConfig,
    stage_counts: &[usize],
    seed: u64,
) -> Vec<(usize, Vec<OrderProfile>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latents: Vec<Latent> = (0..cfg.orders)
        .map(|_| {
            let alpha = uniform(&mut rng, cfg.alpha_range.0, cfg.alpha_range.1);
            let beta = uniform(&mut rng, cfg.beta_range.0, cfg.beta_range.1);
            let cap = cfg.caps[rng.random_range(0..cfg.caps.len())];
            let accept_total = 1.0 / (1.0 + libm::exp(beta));
            // the single-stage realization has the largest per-stage
            // acceptance and cancellation, so keeping the lifecycle
            // cancellation under its survival-at-cap mass keeps every
            // realization valid without touching the derived stages
            let p_at_cap = 1.0 / (1.0 + libm::exp(alpha * cap + beta));
            let q_raw = uniform(&mut rng, 0.0, cfg.max_cancel);
            let cancel_total = q_raw
                .min((1.0 - accept_total) * 0.999)
                .min(((1.0 - p_at_cap) * 0.999).max(0.0));
            Latent {
                alpha,
                accept_total,
                cancel_total,
                cap,
            }
        })
        .collect();

    stage_counts
        .iter()
        .map(|&stages| {
            let orders = latents
                .iter()
                .enumerate()
                .map(|(i, latent)| realize_latent(latent, stages, i as u64))
                .collect();
            (stages, orders)
        })
        .collect()
}

fn realize_latent(latent: &Latent, stages: usize, index: u64) -> OrderProfile {
    let survive_total = (1.0 - latent.accept_total - latent.cancel_total).max(1e-12);
    let r = libm::pow(survive_total, 1.0 / stages as f64);
    let absorb = latent.accept_total + latent.cancel_total;
    let accept_share = latent.accept_total / absorb;
    let p_stage = (1.0 - r) * accept_share;
    let q_stage = (1.0 - r) * (1.0 - accept_share);
    let beta = libm::log(1.0 / p_stage - 1.0);
    let curve = AcceptanceCurve::new(latent.alpha, beta).expect("alpha is negative");
    OrderProfile::new(
        OrderId(format!("o{index:06}")),
        alloc::vec![curve; stages],
        alloc::vec![q_stage; stages],
        latent.cap,
    )
    .expect("latent cancellation clamp keeps realizations valid")
}
