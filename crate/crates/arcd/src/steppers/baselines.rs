//! Reference optimizers: projected/online gradient descent (OGD), its
//! stochastic twin (SGD), and online randomized block coordinate descent
//! (ORBCD) with the unbiased n-scaled coordinate step.

use crate::error::{Error, Result};
use crate::losses::{norm_sq, LossModel};
use crate::sampler::CoordinateSampler;
use crate::steppers::{StepReport, Stepper};

/// Baseline step-size rule.
#[derive(Debug, Clone, Copy)]
pub enum StepRule {
    /// eta_t = 1 / (mu t); strongly convex regime.
    InverseMuT { mu: f64 },
    /// eta_t = c / sqrt(t); general convex regime.
    COverSqrtT { c: f64 },
}

impl StepRule {
    pub fn inverse_mu_t(mu: f64) -> Result<StepRule> {
        if mu <= 0.0 {
            return Err(Error::config("1/(mu t) step rule requires mu > 0"));
        }
        Ok(StepRule::InverseMuT { mu })
    }

    pub fn c_over_sqrt_t(c: f64) -> Result<StepRule> {
        if c <= 0.0 {
            return Err(Error::config("c/sqrt(t) step rule requires c > 0"));
        }
        Ok(StepRule::COverSqrtT { c })
    }

    /// Step size at step t >= 1.
    pub fn eta(&self, t: usize) -> f64 {
        debug_assert!(t >= 1);
        match self {
            StepRule::InverseMuT { mu } => 1.0 / (mu * t as f64),
            StepRule::COverSqrtT { c } => c / (t as f64).sqrt(),
        }
    }
}

/// Full-vector gradient step under a scalar step-size rule; serves as both
/// OGD (online protocol) and SGD (stochastic protocol).
pub struct ScalarRuleStepper {
    name: &'static str,
    y: Vec<f64>,
    rule: StepRule,
    t: usize,
}

pub fn sgd_or_ogd(name: &'static str, n: usize, rule: StepRule) -> Result<ScalarRuleStepper> {
    if n == 0 {
        return Err(Error::config("model dimension must be >= 1"));
    }
    Ok(ScalarRuleStepper {
        name,
        y: vec![0.0; n],
        rule,
        t: 0,
    })
}

impl ScalarRuleStepper {
    pub fn with_start(mut self, start: &[f64]) -> Result<Self> {
        if start.len() != self.y.len() {
            return Err(Error::config("start vector dimension mismatch"));
        }
        self.y.copy_from_slice(start);
        Ok(self)
    }
}

impl Stepper for ScalarRuleStepper {
    fn name(&self) -> &'static str {
        self.name
    }

    fn step(&mut self, loss: &LossModel, sample: usize) -> Result<StepReport> {
        let t = self.t + 1;
        let g = loss.sample_gradient(&self.y, sample)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Step {
                step: t,
                sample,
                coordinate: None,
                message: "non-finite gradient".to_string(),
            });
        }
        let eta = self.rule.eta(t);
        for (yi, gi) in self.y.iter_mut().zip(&g) {
            *yi -= eta * gi;
        }
        self.t = t;
        let g_norm = norm_sq(&g).sqrt();
        Ok(StepReport {
            t,
            sample,
            coordinate: None,
            partial: g_norm,
            alpha_t: 0.0,
            l_t: 0.0,
            delta_norm: eta * g_norm,
            y_coordinates_written: self.y.len(),
            z_coordinates_written: 0,
        })
    }

    fn loss_at(&self, loss: &LossModel, sample: usize) -> f64 {
        let pred = loss.predict(&self.y, sample);
        let y_norm_sq = if loss.mu() > 0.0 {
            norm_sq(&self.y)
        } else {
            0.0
        };
        loss.loss_from_pred(pred, sample, y_norm_sq)
    }

    fn margin_at(&self, loss: &LossModel, sample: usize) -> f64 {
        loss.predict(&self.y, sample)
    }

    fn snapshot(&self) -> Vec<f64> {
        self.y.clone()
    }

    fn momentum_snapshot(&self) -> Vec<f64> {
        self.y.clone()
    }

    fn steps_taken(&self) -> usize {
        self.t
    }
}

/// Online randomized coordinate descent: one coordinate per step, scaled
/// by n so the update is an unbiased full-gradient step.
pub struct OrbcdStepper {
    y: Vec<f64>,
    rule: StepRule,
    sampler: CoordinateSampler,
    t: usize,
}

pub fn orbcd(n: usize, seed: u64, rule: StepRule) -> Result<OrbcdStepper> {
    Ok(OrbcdStepper {
        y: vec![0.0; n],
        rule,
        sampler: CoordinateSampler::new(n, seed)?,
        t: 0,
    })
}

impl OrbcdStepper {
    pub fn with_start(mut self, start: &[f64]) -> Result<Self> {
        if start.len() != self.y.len() {
            return Err(Error::config("start vector dimension mismatch"));
        }
        self.y.copy_from_slice(start);
        Ok(self)
    }
}

impl Stepper for OrbcdStepper {
    fn name(&self) -> &'static str {
        "orbcd"
    }

    fn step(&mut self, loss: &LossModel, sample: usize) -> Result<StepReport> {
        let t = self.t + 1;
        let k = self.sampler.sample_coordinate();
        let g_k = loss.coordinate_partial(&self.y, sample, k)?;
        if !g_k.is_finite() {
            return Err(Error::Step {
                step: t,
                sample,
                coordinate: Some(k),
                message: format!("non-finite partial derivative {g_k}"),
            });
        }
        let eta = self.rule.eta(t);
        let n = self.y.len() as f64;
        self.y[k] -= eta * n * g_k;
        self.t = t;
        Ok(StepReport {
            t,
            sample,
            coordinate: Some(k),
            partial: g_k,
            alpha_t: 0.0,
            l_t: 0.0,
            delta_norm: eta * n * g_k.abs(),
            y_coordinates_written: 1,
            z_coordinates_written: 0,
        })
    }

    fn loss_at(&self, loss: &LossModel, sample: usize) -> f64 {
        let pred = loss.predict(&self.y, sample);
        let y_norm_sq = if loss.mu() > 0.0 {
            norm_sq(&self.y)
        } else {
            0.0
        };
        loss.loss_from_pred(pred, sample, y_norm_sq)
    }

    fn margin_at(&self, loss: &LossModel, sample: usize) -> f64 {
        loss.predict(&self.y, sample)
    }

    fn snapshot(&self) -> Vec<f64> {
        self.y.clone()
    }

    fn momentum_snapshot(&self) -> Vec<f64> {
        self.y.clone()
    }

    fn steps_taken(&self) -> usize {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{LossKind, Normalization};
    use crate::data::{Dataset, Row};

    fn one_sample(a: Vec<f64>, b: f64) -> Dataset {
        let n = a.len();
        Dataset {
            rows: vec![Row::Dense(a)],
            labels: vec![b],
            n,
            normalization: Normalization::None,
            provenance: "test".into(),
        }
    }

    #[test]
    fn rule_values() {
        let strong = StepRule::inverse_mu_t(1.0).unwrap();
        assert_eq!(strong.eta(4), 0.25);
        let general = StepRule::c_over_sqrt_t(2.0).unwrap();
        assert_eq!(general.eta(4), 1.0);
        assert!(StepRule::inverse_mu_t(0.0).is_err());
        assert!(StepRule::c_over_sqrt_t(-1.0).is_err());
    }

    #[test]
    fn ogd_hand_step() {
        // f(y) = y^2/2 at y=2 with eta=0.5 -> y'=1
        let ds = one_sample(vec![1.0], 0.0);
        let loss = LossModel::new(LossKind::Squared, 0.0, &ds).unwrap();
        let mut ogd = sgd_or_ogd("ogd", 1, StepRule::c_over_sqrt_t(0.5).unwrap())
            .unwrap()
            .with_start(&[2.0])
            .unwrap();
        ogd.step(&loss, 0).unwrap();
        assert_eq!(ogd.snapshot(), vec![1.0]);
    }

    #[test]
    fn ogd_zero_gradient_fixed_point() {
        let ds = one_sample(vec![1.0], 2.0);
        let loss = LossModel::new(LossKind::Squared, 0.0, &ds).unwrap();
        let mut ogd = sgd_or_ogd("ogd", 1, StepRule::c_over_sqrt_t(1.0).unwrap())
            .unwrap()
            .with_start(&[2.0])
            .unwrap();
        ogd.step(&loss, 0).unwrap();
        assert_eq!(ogd.snapshot(), vec![2.0]);
    }

    #[test]
    fn orbcd_hand_step() {
        // n=2, grad=(2,4) at y=(2,4) for f = ||y||^2/2 via two unit rows;
        // force k=1 by checking both possibilities deterministically.
        let ds = Dataset {
            rows: vec![Row::Dense(vec![0.0, 1.0])],
            labels: vec![0.0],
            n: 2,
            normalization: Normalization::None,
            provenance: "test".into(),
        };
        let loss = LossModel::new(LossKind::Squared, 0.0, &ds).unwrap();
        let mut stepper = orbcd(2, 11, StepRule::c_over_sqrt_t(0.1).unwrap())
            .unwrap()
            .with_start(&[1.0, 4.0])
            .unwrap();
        let before = stepper.snapshot();
        let report = stepper.step(&loss, 0).unwrap();
        let after = stepper.snapshot();
        let k = report.coordinate.unwrap();
        // exactly one coordinate moved
        let moved: Vec<usize> = (0..2)
            .filter(|&i| after[i] != before[i] || i == k)
            .collect();
        assert!(moved == vec![k] || report.partial == 0.0);
        if k == 1 {
            // partial = pred - 0 = 4, update = eta * n * g = 0.1 * 2 * 4 = 0.8
            assert!((after[1] - (4.0 - 0.8)).abs() < 1e-15);
        } else {
            // feature 0 absent from the sample: partial 0, no movement
            assert_eq!(after, before);
        }
    }

    #[test]
    fn orbcd_unbiased_over_coordinates() {
        // E_k[y' - y] = -eta * grad exactly when enumerating k
        let ds = one_sample(vec![1.0, 2.0], 0.0);
        let loss = LossModel::new(LossKind::Squared, 0.0, &ds).unwrap();
        let y = vec![1.0, 1.0];
        let grad = loss.sample_gradient(&y, 0).unwrap();
        let eta = 0.1;
        let n = 2.0;
        let mut mean_delta = [0.0; 2];
        for k in 0..2 {
            let g_k = loss.coordinate_partial(&y, 0, k).unwrap();
            mean_delta[k] += (-eta * n * g_k) / n;
        }
        for k in 0..2 {
            assert!((mean_delta[k] - (-eta * grad[k])).abs() < 1e-15);
        }
    }
}
