//! Regret and suboptimality metrics, built around the offline comparator
//! `y* = argmin_y sum_t f_t(y)`.
//!
//! The squared-loss comparator solves the regularized normal equations
//! exactly through a dense symmetric factorization, falling back to the
//! minimum-norm pseudo-solution (and flagging it) when the mu = 0 system
//! is singular. The logistic comparator runs full-gradient descent with
//! backtracking until the gradient norm reaches 1e-8 or the iteration cap.
//!
//! Regret always measures against the comparator fixed at the full
//! horizon; the per-prefix comparator exists separately for plot fairness.

use nalgebra::{DMatrix, DVector};

use crate::config::LossKind;
use crate::error::{Error, Result};
use crate::losses::{norm_sq, LossModel};

/// Gradient-norm target for the logistic comparator.
pub const LOGISTIC_COMPARATOR_TOL: f64 = 1e-8;
const LOGISTIC_MAX_ITERS: usize = 100_000;
/// Refuse dense normal equations beyond this dimension.
const DENSE_SOLVE_LIMIT: usize = 20_000;

#[derive(Debug, Clone)]
pub struct ComparatorResult {
    pub y_star: Vec<f64>,
    /// `sum_t f_t(y_star)` over the round stream.
    pub objective: f64,
    /// True when the singular mu = 0 system took the pseudo-solve path.
    pub singular_fallback: bool,
    /// Squared: residual norm of the normal equations. Logistic: achieved
    /// gradient norm.
    pub achieved_residual: f64,
}

/// Deduplicates a round stream into (row, weight) pairs, preserving first
/// appearance order.
fn dedupe(rounds: &[usize], m: usize) -> Vec<(usize, f64)> {
    let mut counts = vec![0u64; m];
    let mut order = Vec::new();
    for &r in rounds {
        if counts[r] == 0 {
            order.push(r);
        }
        counts[r] += 1;
    }
    order.into_iter().map(|r| (r, counts[r] as f64)).collect()
}

/// Offline minimizer of the summed round losses.
pub fn comparator(loss: &LossModel, rounds: &[usize]) -> Result<ComparatorResult> {
    if rounds.is_empty() {
        return Err(Error::config("comparator needs at least one round"));
    }
    if let Some(&bad) = rounds.iter().find(|&&r| r >= loss.samples()) {
        return Err(Error::data(format!(
            "round sample {bad} out of range for m = {}",
            loss.samples()
        )));
    }
    let weighted = dedupe(rounds, loss.samples());
    let t_total = rounds.len() as f64;
    match loss.kind() {
        LossKind::Squared => squared_comparator(loss, &weighted, t_total),
        LossKind::Logistic => logistic_comparator(loss, &weighted, t_total),
    }
}

fn summed_objective(loss: &LossModel, weighted: &[(usize, f64)], t_total: f64, y: &[f64]) -> f64 {
    let data: f64 = weighted
        .iter()
        .map(|&(r, w)| {
            let pred = loss.predict(y, r);
            w * loss.loss_from_pred(pred, r, 0.0)
        })
        .sum();
    data + 0.5 * loss.mu() * t_total * norm_sq(y)
}

fn squared_comparator(
    loss: &LossModel,
    weighted: &[(usize, f64)],
    t_total: f64,
) -> Result<ComparatorResult> {
    let n = loss.dimension();
    if n > DENSE_SOLVE_LIMIT {
        return Err(Error::config(format!(
            "dense normal equations refused at n = {n} (> {DENSE_SOLVE_LIMIT})"
        )));
    }
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut row_buf = vec![0.0; n];
    for &(r, w) in weighted {
        row_buf.iter_mut().for_each(|v| *v = 0.0);
        loss.row(r).add_scaled_into(1.0, &mut row_buf);
        let b = loss.label(r);
        for i in 0..n {
            if row_buf[i] == 0.0 {
                continue;
            }
            rhs[i] += w * b * row_buf[i];
            for j in 0..n {
                gram[(i, j)] += w * row_buf[i] * row_buf[j];
            }
        }
    }
    let ridge = loss.mu() * t_total;
    for i in 0..n {
        gram[(i, i)] += ridge;
    }

    let mut singular_fallback = false;
    let solution = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            singular_fallback = true;
            let svd = gram.clone().svd(true, true);
            svd.solve(&rhs, 1e-12)
                .map_err(|e| Error::config(format!("pseudo-solve failed: {e}")))?
        }
    };
    let residual = (&gram * &solution - &rhs).norm();
    let y_star: Vec<f64> = solution.iter().copied().collect();
    let objective = summed_objective(loss, weighted, t_total, &y_star);
    Ok(ComparatorResult {
        y_star,
        objective,
        singular_fallback,
        achieved_residual: residual,
    })
}

fn logistic_comparator(
    loss: &LossModel,
    weighted: &[(usize, f64)],
    t_total: f64,
) -> Result<ComparatorResult> {
    let n = loss.dimension();
    let mut y = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let ridge = loss.mu() * t_total;

    let objective = |y: &[f64]| summed_objective(loss, weighted, t_total, y);
    let fill_grad = |y: &[f64], grad: &mut Vec<f64>| {
        grad.iter_mut().zip(y).for_each(|(g, yi)| *g = ridge * yi);
        for &(r, w) in weighted {
            let pred = loss.predict(y, r);
            let slope = w * loss.dloss_dpred(pred, r);
            loss.row(r).add_scaled_into(slope, grad);
        }
    };

    let mut f_y = objective(&y);
    let mut eta = 1.0f64;
    let mut grad_norm = f64::INFINITY;
    for _ in 0..LOGISTIC_MAX_ITERS {
        fill_grad(&y, &mut grad);
        let g_sq = norm_sq(&grad);
        grad_norm = g_sq.sqrt();
        if grad_norm <= LOGISTIC_COMPARATOR_TOL {
            break;
        }
        // backtracking Armijo line search with gentle growth between steps
        eta = (eta * 2.0).min(1e6);
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - eta * gi).collect();
            let f_trial = objective(&trial);
            if f_trial <= f_y - 0.5 * eta * g_sq {
                y = trial;
                f_y = f_trial;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break; // step size underflow: gradient is numerically flat
        }
    }
    Ok(ComparatorResult {
        y_star: y.clone(),
        objective: f_y,
        singular_fallback: false,
        achieved_residual: grad_norm,
    })
}

/// Comparator over the whole dataset, uniformly weighted; returns the
/// minimizer together with `f* = full_objective(y*)`.
pub fn full_dataset_comparator(loss: &LossModel) -> Result<(ComparatorResult, f64)> {
    let rounds: Vec<usize> = (0..loss.samples()).collect();
    let result = comparator(loss, &rounds)?;
    let f_star = loss.full_objective(&result.y_star);
    Ok((result, f_star))
}

/// `f(y) - f*`; nonnegative up to comparator accuracy.
pub fn suboptimality(loss: &LossModel, y: &[f64], f_star: f64) -> f64 {
    loss.full_objective(y) - f_star
}

/// Per-round losses of a fixed vector along a round stream.
pub fn per_round_losses(loss: &LossModel, rounds: &[usize], y: &[f64]) -> Vec<f64> {
    let y_norm_sq = if loss.mu() > 0.0 { norm_sq(y) } else { 0.0 };
    rounds
        .iter()
        .map(|&r| {
            let pred = loss.predict(y, r);
            loss.loss_from_pred(pred, r, y_norm_sq)
        })
        .collect()
}

/// Prefix regret curve against a fixed-horizon comparator's per-round
/// losses: `R(t) = sum_{s<=t} charged_s - sum_{s<=t} comparator_s`.
pub fn regret_curve(charged: &[f64], comparator_losses: &[f64]) -> Vec<f64> {
    debug_assert_eq!(charged.len(), comparator_losses.len());
    let mut out = Vec::with_capacity(charged.len());
    let mut acc = 0.0;
    for (c, y) in charged.iter().zip(comparator_losses) {
        acc += c - y;
        out.push(acc);
    }
    out
}

/// Cumulative online losses, the comparator value, and both regret
/// ledgers (charged and strict protocol).
#[derive(Debug, Clone)]
pub struct RegretLedger {
    pub cumulative_loss: f64,
    pub comparator_value: f64,
    pub regret: f64,
    pub curve: Vec<f64>,
    pub strict_cumulative_loss: f64,
    pub strict_regret: f64,
    pub strict_curve: Vec<f64>,
}

impl RegretLedger {
    pub fn build(charged: &[f64], strict: &[f64], comparator_losses: &[f64]) -> RegretLedger {
        let curve = regret_curve(charged, comparator_losses);
        let strict_curve = regret_curve(strict, comparator_losses);
        let cumulative_loss: f64 = charged.iter().sum();
        let strict_cumulative_loss: f64 = strict.iter().sum();
        let comparator_value: f64 = comparator_losses.iter().sum();
        RegretLedger {
            cumulative_loss,
            comparator_value,
            regret: cumulative_loss - comparator_value,
            curve,
            strict_cumulative_loss,
            strict_regret: strict_cumulative_loss - comparator_value,
            strict_curve,
        }
    }
}

/// `sum_{t<=p} f_t(y*_p)` at each requested prefix, each with its own
/// comparator (the plot-fairness mode).
pub fn prefix_comparator_values(
    loss: &LossModel,
    rounds: &[usize],
    prefixes: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(prefixes.len());
    for &p in prefixes {
        if p == 0 || p > rounds.len() {
            return Err(Error::config(format!(
                "prefix {p} outside 1..={}",
                rounds.len()
            )));
        }
        let result = comparator(loss, &rounds[..p])?;
        out.push((p, result.objective));
    }
    Ok(out)
}

/// Online classification accuracy from pre-update margins: the model
/// predicts `sign(<a_t, y_{t-1}>)` with ties resolved to +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierStats {
    pub accuracy: f64,
    pub mistakes: usize,
    pub rounds: usize,
}

pub fn classify_stats(margins_pre: &[f64], labels: &[f64]) -> ClassifierStats {
    debug_assert_eq!(margins_pre.len(), labels.len());
    let rounds = margins_pre.len();
    let mistakes = margins_pre
        .iter()
        .zip(labels)
        .filter(|&(&margin, &label)| {
            let pred = if margin >= 0.0 { 1.0 } else { -1.0 };
            pred != label
        })
        .count();
    ClassifierStats {
        accuracy: if rounds == 0 {
            1.0
        } else {
            1.0 - mistakes as f64 / rounds as f64
        },
        mistakes,
        rounds,
    }
}
