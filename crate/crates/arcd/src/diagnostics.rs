//! Measured analysis constants and the closed-form rate/regret bounds
//! they plug into.
//!
//! The schedules never need these quantities; they exist so a finished run
//! can be checked against the theoretical guarantees with constants
//! observed on the actual trajectory:
//!
//! * `sigma_hat` — max over probes of `||g(x_t, xi_t) - grad f(x_t)||`
//! * `d_hat`     — max over steps of `||x_star - z_t||`
//! * `r_hat`     — max over observed points of `||grad f_t(.)||`
//! * `g_hat`     — `((1-alpha^2) L_2 - alpha (1-alpha) L) ||y_1 - z_1||^2`

use crate::config::{Regime, RunConfig};
use crate::losses::LossModel;
use crate::steppers::{protocol_of, Protocol, Stepper};

#[derive(Debug, Clone)]
pub struct Measured {
    pub l_used: f64,
    pub sigma_hat: Option<f64>,
    pub d_hat: Option<f64>,
    pub r_hat: Option<f64>,
    pub g_hat: Option<f64>,
}

impl Measured {
    pub fn new(l_used: f64) -> Self {
        Measured {
            l_used,
            sigma_hat: None,
            d_hat: None,
            r_hat: None,
            g_hat: None,
        }
    }

    /// Pre-step probe: round-gradient norm at the current iterate.
    pub fn observe_gradient_norm(
        &mut self,
        loss: &LossModel,
        stepper: &dyn Stepper,
        sample: usize,
    ) {
        let y = stepper.snapshot();
        if let Ok(norm) = loss.sample_gradient_norm(&y, sample) {
            let r = self.r_hat.get_or_insert(0.0);
            *r = r.max(norm);
        }
    }

    /// Post-step bookkeeping: gradient norm at the new iterate, momentum
    /// distance to the reference, and the G constant after the first
    /// online step.
    #[allow(clippy::too_many_arguments)]
    pub fn observe_post_step(
        &mut self,
        loss: &LossModel,
        stepper: &dyn Stepper,
        sample: usize,
        reference: Option<&[f64]>,
        count: usize,
        config: &RunConfig,
        l_used: f64,
    ) {
        let y = stepper.snapshot();
        if let Ok(norm) = loss.sample_gradient_norm(&y, sample) {
            let r = self.r_hat.get_or_insert(0.0);
            *r = r.max(norm);
        }
        if let Some(reference) = reference {
            let z = stepper.momentum_snapshot();
            let dist = reference
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let d = self.d_hat.get_or_insert(0.0);
            *d = d.max(dist);
        }
        if count == 1 && protocol_of(config.algo) == Protocol::Online {
            let z = stepper.momentum_snapshot();
            let gap_sq: f64 = y.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            let alpha = config.alpha;
            let l_2 = match config.regime {
                Regime::General => alpha * l_used + l_used,
                Regime::Strong => 2.0 * alpha * config.mu + l_used,
            };
            self.g_hat =
                Some(((1.0 - alpha * alpha) * l_2 - alpha * (1.0 - alpha) * l_used) * gap_sq);
        }
    }

    /// Gradient-noise probe at the extrapolation point of the last step.
    pub fn observe_sigma_probe(&mut self, loss: &LossModel, stepper: &dyn Stepper, sample: usize) {
        let Some(x) = stepper.extrapolation_snapshot() else {
            return;
        };
        let Ok(sample_grad) = loss.sample_gradient(&x, sample) else {
            return;
        };
        let full = loss.full_gradient(&x);
        let gap = sample_grad
            .iter()
            .zip(&full)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let s = self.sigma_hat.get_or_insert(0.0);
        *s = s.max(gap);
    }
}

/// Suboptimality bound for the general-convex stochastic schedule at the
/// algorithm-convention index `t` of the final iterate.
pub fn sarcd_general_bound(t: usize, n: usize, l: f64, b: f64, d: f64, sigma: f64) -> f64 {
    let t = t.max(1) as f64;
    let n = n as f64;
    2.0 * n * n * d * d * l / (t * t)
        + (2.0 * n * d * d * b + 4.0 * sigma * sigma / (3.0 * b)) / t.sqrt()
}

/// Suboptimality bound for the strongly convex stochastic schedule.
pub fn sarcd_strong_bound(t: usize, n: usize, l: f64, mu: f64, d: f64, sigma: f64) -> f64 {
    let t = t as f64;
    let n = n as f64;
    2.0 * (n * n * l + mu) * d * d / ((t + 2.0) * (t + 2.0))
        + (2.0 * n * sigma * sigma / ((t + 2.0) * mu)) * (1.0 + 2.0 * (t + 1.0).ln() / (t + 2.0))
}

/// Regret bound for the general-convex online schedule at horizon `t`.
pub fn oarcd_general_regret_bound(
    t: usize,
    n: usize,
    l: f64,
    alpha: f64,
    r: f64,
    d: f64,
    g: f64,
) -> f64 {
    let t = t as f64;
    let n = n as f64;
    (2.0 * r * r / (alpha * l) + l * d * d / 2.0) * (n * t).sqrt()
        + r * r / ((1.0 - alpha) * alpha * l) * (t / n).sqrt()
        + ((alpha + 1.0) * l * d * d / (2.0 * alpha) + g / 2.0) * n.sqrt()
}

/// Regret bound for the strongly convex online schedule at horizon `t`.
#[allow(clippy::too_many_arguments)]
pub fn oarcd_strong_regret_bound(
    t: usize,
    n: usize,
    l: f64,
    mu: f64,
    alpha: f64,
    r: f64,
    d: f64,
    g: f64,
) -> f64 {
    let t = t as f64;
    let n = n as f64;
    let log_term = (t + 1.0).ln();
    r * r * log_term / (2.0 * (1.0 - alpha) * alpha * mu)
        + n * r * r * log_term / (alpha * mu)
        + d * d / (2.0 * alpha) * (2.0 * alpha * mu + l)
        + g / 2.0
}

/// Bound-balancing default for the free schedule constant b when
/// diagnostics estimated sigma and D; 1.0 otherwise.
pub fn suggest_b(sigma_hat: Option<f64>, d_hat: Option<f64>, n: usize) -> f64 {
    match (sigma_hat, d_hat) {
        (Some(sigma), Some(d)) if sigma > 0.0 && d > 0.0 => {
            sigma * (2.0 / (3.0 * n as f64 * d * d)).sqrt()
        }
        _ => 1.0,
    }
}
