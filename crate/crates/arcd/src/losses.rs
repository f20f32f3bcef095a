//! Smooth convex per-sample losses over a dataset: values, gradients,
//! single-coordinate partials, and curvature constants.
//!
//! Both kinds predict through the linear form `p = <a_i, y>`:
//!
//! * squared:  `l(y, i) = (p - b_i)^2 / 2 + (mu/2) ||y||^2`
//! * logistic: `l(y, i) = ln(1 + exp(-b_i p)) + (mu/2) ||y||^2`, labels in {-1,+1}
//!
//! The aggregate objective is the uniform average over rows, so the
//! per-sample gradient is an unbiased estimator of the full gradient.
//! Strong convexity enters exclusively through the explicit l2 term.

use crate::config::LossKind;
use crate::data::{Dataset, Row};
use crate::error::{Error, Result};

/// Smoothness data derived from the feature rows.
#[derive(Debug, Clone)]
pub struct SmoothnessEstimate {
    /// Lipschitz constant of the (per-sample and aggregate) gradient.
    pub l_global: f64,
    /// Squared l2 norm of every feature row.
    pub per_sample_norms: Vec<f64>,
}

/// A loss kind bound to a dataset, with the l2 coefficient `mu`.
///
/// Immutable after construction; cheap to share across parallel runs.
pub struct LossModel<'a> {
    kind: LossKind,
    mu: f64,
    data: &'a Dataset,
    row_norm_sq: Vec<f64>,
}

/// `ln(1 + e^u)` without overflow.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

impl<'a> LossModel<'a> {
    pub fn new(kind: LossKind, mu: f64, data: &'a Dataset) -> Result<Self> {
        if mu < 0.0 {
            return Err(Error::config("l2 coefficient mu must be >= 0"));
        }
        data.validate()?;
        if kind == LossKind::Logistic {
            for (i, &label) in data.labels.iter().enumerate() {
                if label != 1.0 && label != -1.0 {
                    return Err(Error::data(format!(
                        "logistic loss needs labels in {{-1,+1}}; row {i} has {label}"
                    )));
                }
            }
        }
        let row_norm_sq = data.rows.iter().map(Row::norm_sq).collect();
        Ok(LossModel {
            kind,
            mu,
            data,
            row_norm_sq,
        })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dimension(&self) -> usize {
        self.data.n
    }

    pub fn samples(&self) -> usize {
        self.data.m()
    }

    pub fn dataset(&self) -> &Dataset {
        self.data
    }

    pub fn row(&self, sample: usize) -> &Row {
        &self.data.rows[sample]
    }

    pub fn label(&self, sample: usize) -> f64 {
        self.data.labels[sample]
    }

    /// The linear prediction `<a_i, y>`.
    pub fn predict(&self, y: &[f64], sample: usize) -> f64 {
        self.data.rows[sample].dot(y)
    }

    /// Loss at `y` on one sample, given its precomputed prediction.
    pub fn loss_from_pred(&self, pred: f64, sample: usize, y_norm_sq: f64) -> f64 {
        let data_term = match self.kind {
            LossKind::Squared => {
                let r = pred - self.data.labels[sample];
                0.5 * r * r
            }
            LossKind::Logistic => softplus(-self.data.labels[sample] * pred),
        };
        data_term + 0.5 * self.mu * y_norm_sq
    }

    /// Derivative of the data term with respect to the prediction.
    pub fn dloss_dpred(&self, pred: f64, sample: usize) -> f64 {
        match self.kind {
            LossKind::Squared => pred - self.data.labels[sample],
            LossKind::Logistic => {
                let b = self.data.labels[sample];
                // -b * sigmoid(-b p) = -b / (1 + e^{b p})
                -b / (1.0 + (b * pred).exp())
            }
        }
    }

    /// Per-sample loss value.
    pub fn loss_value(&self, y: &[f64], sample: usize) -> Result<f64> {
        self.check_sample(sample)?;
        let pred = self.predict(y, sample);
        let y_norm_sq = if self.mu > 0.0 { norm_sq(y) } else { 0.0 };
        Ok(self.loss_from_pred(pred, sample, y_norm_sq))
    }

    /// Exact analytic gradient of `loss_value` with respect to `y`.
    pub fn sample_gradient(&self, y: &[f64], sample: usize) -> Result<Vec<f64>> {
        self.check_sample(sample)?;
        let pred = self.predict(y, sample);
        let slope = self.dloss_dpred(pred, sample);
        let mut grad = if self.mu > 0.0 {
            y.iter().map(|v| self.mu * v).collect()
        } else {
            vec![0.0; y.len()]
        };
        self.data.rows[sample].add_scaled_into(slope, &mut grad);
        Ok(grad)
    }

    /// One coordinate of the per-sample gradient.
    ///
    /// Cost is at most one sparse dot over the row; zero feature with
    /// `mu = 0` short-circuits without touching other coordinates.
    pub fn coordinate_partial(&self, y: &[f64], sample: usize, coord: usize) -> Result<f64> {
        self.check_sample(sample)?;
        if coord >= self.data.n {
            return Err(Error::config(format!(
                "coordinate {coord} out of range for n = {}",
                self.data.n
            )));
        }
        let a_k = self.data.rows[sample].get(coord);
        if a_k == 0.0 && self.mu == 0.0 {
            return Ok(0.0);
        }
        let pred = self.predict(y, sample);
        Ok(self.dloss_dpred(pred, sample) * a_k + self.mu * y[coord])
    }

    /// Gradient-Lipschitz constant of the aggregate implied by the rows.
    ///
    /// Squared: `max_i ||a_i||^2 + mu`. Logistic: `max_i ||a_i||^2 / 4 + mu`.
    /// An all-zero dataset with `mu = 0` has no curvature and is rejected.
    pub fn smoothness_constant(&self) -> Result<f64> {
        let max_norm = self.row_norm_sq.iter().cloned().fold(0.0f64, f64::max);
        let data_term = match self.kind {
            LossKind::Squared => max_norm,
            LossKind::Logistic => 0.25 * max_norm,
        };
        let l = data_term + self.mu;
        if l <= 0.0 {
            return Err(Error::config(
                "dataset is all-zero and mu = 0: objective has no curvature",
            ));
        }
        Ok(l)
    }

    pub fn smoothness_estimate(&self) -> Result<SmoothnessEstimate> {
        Ok(SmoothnessEstimate {
            l_global: self.smoothness_constant()?,
            per_sample_norms: self.row_norm_sq.clone(),
        })
    }

    /// Uniform average of the per-sample losses; diagnostics only, never
    /// part of a step.
    pub fn full_objective(&self, y: &[f64]) -> f64 {
        let m = self.data.m() as f64;
        let y_norm_sq = if self.mu > 0.0 { norm_sq(y) } else { 0.0 };
        let data_sum: f64 = (0..self.data.m())
            .map(|i| {
                let pred = self.predict(y, i);
                self.loss_from_pred(pred, i, 0.0)
            })
            .sum();
        data_sum / m + 0.5 * self.mu * y_norm_sq
    }

    /// Gradient of `full_objective`.
    pub fn full_gradient(&self, y: &[f64]) -> Vec<f64> {
        let m = self.data.m() as f64;
        let mut grad = if self.mu > 0.0 {
            y.iter().map(|v| self.mu * v).collect()
        } else {
            vec![0.0; y.len()]
        };
        for i in 0..self.data.m() {
            let pred = self.predict(y, i);
            let slope = self.dloss_dpred(pred, i) / m;
            self.data.rows[i].add_scaled_into(slope, &mut grad);
        }
        grad
    }

    /// l2 norm of the per-sample gradient, using the cached row norms when
    /// the computation stays one-dimensional.
    pub fn sample_gradient_norm(&self, y: &[f64], sample: usize) -> Result<f64> {
        if self.mu == 0.0 {
            let pred = self.predict(y, sample);
            let slope = self.dloss_dpred(pred, sample);
            Ok(slope.abs() * self.row_norm_sq[sample].sqrt())
        } else {
            Ok(norm_sq(&self.sample_gradient(y, sample)?).sqrt())
        }
    }

    fn check_sample(&self, sample: usize) -> Result<()> {
        if sample >= self.data.m() {
            return Err(Error::data(format!(
                "sample index {sample} out of range for m = {}",
                self.data.m()
            )));
        }
        Ok(())
    }
}

pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}
