//! The (alpha_t, L_t) parameter sequences that drive the accelerated
//! steppers, one per algorithm/regime pair, plus the lambda recursion
//! state used in the strongly convex stochastic case.
//!
//! All four schedules are anytime: no formula depends on the horizon.

use crate::error::{Error, Result};

/// Which sequence family to generate. Carries the constants the formulas
/// need beyond the step index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// alpha_t = 2/(t+2), L_t = b (t+1)^{3/2} + n L, scaling a(n) = n,
    /// b(n) = 1/n, mu = 0.
    SarcdGeneral { b: f64 },
    /// alpha_0 = 1, L_0 = a(n) L + a(n) mu / n^2, then the lambda
    /// recursion; a(n) = n, b(n) = 1/n, mu > 0.
    SarcdStrong,
    /// alpha_t = alpha, L_t = alpha sqrt(t-1) L + L, a(n) = sqrt(n),
    /// b(n) = 1, mu = 0.
    OarcdGeneral { alpha: f64 },
    /// alpha_t = alpha, L_t = alpha mu t + L, a(n) = n, b(n) = 1, mu > 0.
    OarcdStrong { alpha: f64 },
}

/// Per-step parameters handed to a stepper.
#[derive(Debug, Clone, Copy)]
pub struct StepParams {
    pub alpha_t: f64,
    pub l_t: f64,
}

/// General-convex stochastic schedule.
pub fn sarcd_general_params(t: usize, n: usize, l: f64, b: f64) -> StepParams {
    debug_assert!(l > 0.0 && b > 0.0);
    let alpha_t = 2.0 / (t as f64 + 2.0);
    let l_t = b * (t as f64 + 1.0).powf(1.5) + n as f64 * l;
    StepParams { alpha_t, l_t }
}

/// Strongly convex stochastic schedule.
///
/// Returns `(alpha_t, L_t, lambda_t)`. The caller threads `lambda_prev`
/// (= lambda_{t-1}) through successive calls; at `t = 0` it is ignored
/// and the fixed head values alpha_0 = 1, lambda_0 = 1 are produced.
pub fn sarcd_strong_params(
    lambda_prev: f64,
    t: usize,
    n: usize,
    l: f64,
    mu: f64,
) -> Result<(f64, f64, f64)> {
    if mu <= 0.0 {
        return Err(Error::config("strongly convex schedule requires mu > 0"));
    }
    let a_n = n as f64;
    let nn = n as f64 * n as f64;
    if t == 0 {
        let l_0 = a_n * l + a_n * mu / nn;
        return Ok((1.0, l_0, 1.0));
    }
    if !lambda_prev.is_finite() || lambda_prev <= 0.0 || lambda_prev > 1.0 {
        return Err(Error::Schedule(format!(
            "lambda_{} = {lambda_prev} outside (0,1]; horizon too long for the arithmetic",
            t - 1
        )));
    }
    let alpha_t = (lambda_prev + lambda_prev * lambda_prev / 4.0).sqrt() - lambda_prev / 2.0;
    let l_t = a_n * l + a_n * mu / (nn * lambda_prev);
    let lambda_t = lambda_prev * (1.0 - alpha_t);
    if lambda_t <= 0.0 || !lambda_t.is_finite() {
        return Err(Error::Schedule(format!(
            "lambda underflow at t = {t}: lambda_t = {lambda_t}"
        )));
    }
    Ok((alpha_t, l_t, lambda_t))
}

/// General-convex online schedule; `alpha` must lie in (0,1).
pub fn oarcd_general_params(t: usize, l: f64, alpha: f64) -> Result<StepParams> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::config(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    if t == 0 {
        return Err(Error::config("online schedule starts at t = 1"));
    }
    let l_t = alpha * ((t - 1) as f64).sqrt() * l + l;
    Ok(StepParams {
        alpha_t: alpha,
        l_t,
    })
}

/// Strongly convex online schedule; linear L growth.
pub fn oarcd_strong_params(t: usize, l: f64, mu: f64, alpha: f64) -> Result<StepParams> {
    if mu <= 0.0 {
        return Err(Error::config("strongly convex schedule requires mu > 0"));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::config(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    if t == 0 {
        return Err(Error::config("online schedule starts at t = 1"));
    }
    Ok(StepParams {
        alpha_t: alpha,
        l_t: alpha * mu * t as f64 + l,
    })
}

/// Stateful schedule bound to problem constants; owns the lambda recursion.
#[derive(Debug, Clone)]
pub struct Schedule {
    kind: ScheduleKind,
    n: usize,
    l: f64,
    mu: f64,
    lambda_prev: f64,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, n: usize, l: f64, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("schedule requires n >= 1"));
        }
        if l <= 0.0 || !l.is_finite() {
            return Err(Error::config(format!(
                "smoothness constant L = {l} invalid"
            )));
        }
        match kind {
            ScheduleKind::SarcdGeneral { b } if b <= 0.0 => {
                return Err(Error::config("schedule constant b must be > 0"));
            }
            ScheduleKind::SarcdStrong | ScheduleKind::OarcdStrong { .. } if mu <= 0.0 => {
                return Err(Error::config("strongly convex schedule requires mu > 0"));
            }
            ScheduleKind::OarcdGeneral { alpha } | ScheduleKind::OarcdStrong { alpha }
                if !(0.0 < alpha && alpha < 1.0) =>
            {
                return Err(Error::config(format!(
                    "alpha must lie in (0,1), got {alpha}"
                )));
            }
            _ => {}
        }
        Ok(Schedule {
            kind,
            n,
            l,
            mu,
            lambda_prev: 1.0,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// The dimension the scalar formulas are evaluated at.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coordinate scaling a(n) for this schedule.
    pub fn a_n(&self) -> f64 {
        match self.kind {
            ScheduleKind::SarcdGeneral { .. } | ScheduleKind::SarcdStrong => self.n as f64,
            ScheduleKind::OarcdGeneral { .. } => (self.n as f64).sqrt(),
            ScheduleKind::OarcdStrong { .. } => self.n as f64,
        }
    }

    /// Constant b(n) fixed by the analysis: 1/n stochastic, 1 online.
    pub fn b_n(&self) -> f64 {
        match self.kind {
            ScheduleKind::SarcdGeneral { .. } | ScheduleKind::SarcdStrong => 1.0 / self.n as f64,
            _ => 1.0,
        }
    }

    /// Parameters for step `t`, advancing the lambda recursion when the
    /// kind requires one. Steps must be requested in order.
    pub fn params_at(&mut self, t: usize) -> Result<StepParams> {
        match self.kind {
            ScheduleKind::SarcdGeneral { b } => Ok(sarcd_general_params(t, self.n, self.l, b)),
            ScheduleKind::SarcdStrong => {
                let (alpha_t, l_t, lambda_t) =
                    sarcd_strong_params(self.lambda_prev, t, self.n, self.l, self.mu)?;
                self.lambda_prev = lambda_t;
                Ok(StepParams { alpha_t, l_t })
            }
            ScheduleKind::OarcdGeneral { alpha } => oarcd_general_params(t, self.l, alpha),
            ScheduleKind::OarcdStrong { alpha } => oarcd_strong_params(t, self.l, self.mu, alpha),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_prev
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sarcd_general_head_values() {
        // t=0: alpha = 1, L_0 = b + nL
        let p = sarcd_general_params(0, 3, 2.0, 0.5);
        assert_eq!(p.alpha_t, 1.0);
        assert_eq!(p.l_t, 0.5 + 3.0 * 2.0);
    }

    #[test]
    fn sarcd_general_direct_evaluation() {
        // t=2, b=1, n=1, L=1: alpha = 0.5, L_2 = 3^{1.5} + 1
        let p = sarcd_general_params(2, 1, 1.0, 1.0);
        assert_eq!(p.alpha_t, 0.5);
        assert!((p.l_t - (3.0f64.powf(1.5) + 1.0)).abs() < 1e-12);
        assert!((p.l_t - 6.196_152_422_706_632).abs() < 1e-9);
    }

    #[test]
    fn sarcd_general_monotone() {
        let mut prev = sarcd_general_params(0, 4, 1.0, 1.0);
        for t in 1..=10_000 {
            let p = sarcd_general_params(t, 4, 1.0, 1.0);
            assert!(p.alpha_t < prev.alpha_t);
            assert!(p.l_t > prev.l_t);
            prev = p;
        }
    }

    #[test]
    fn sarcd_general_exceeds_scaled_smoothness() {
        for t in 0..1000 {
            let p = sarcd_general_params(t, 7, 0.3, 0.01);
            assert!(p.l_t > 7.0 * 0.3);
        }
    }

    #[test]
    fn sarcd_strong_alpha_one_head() {
        let (a0, l0, lam0) = sarcd_strong_params(1.0, 0, 2, 1.0, 0.5).unwrap();
        assert_eq!(a0, 1.0);
        assert_eq!(lam0, 1.0);
        // L_0 = nL + n mu / n^2 = 2 + 0.25
        assert!((l0 - 2.25).abs() < 1e-15);
    }

    #[test]
    fn sarcd_strong_golden_alpha_one() {
        // alpha_1 = (sqrt(5) - 1) / 2
        let (a1, _, _) = sarcd_strong_params(1.0, 1, 1, 1.0, 0.5).unwrap();
        assert!((a1 - (5.0f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sarcd_strong_recursion_oracle_t2() {
        let (a1, _, lam1) = sarcd_strong_params(1.0, 1, 1, 1.0, 0.5).unwrap();
        assert!((lam1 - (1.0 - a1)).abs() < 1e-15);
        assert!((lam1 - 0.381_966_011_250_105).abs() < 1e-12);
        let (a2, _, lam2) = sarcd_strong_params(lam1, 2, 1, 1.0, 0.5).unwrap();
        // independent route: alpha_2 is the positive root of
        // a^2 + lam1 a - lam1 = 0
        let root = ((lam1 * lam1 + 4.0 * lam1).sqrt() - lam1) / 2.0;
        assert!((a2 - root).abs() < 1e-14);
        assert!((a2 - 0.455_886_8).abs() < 1e-6);
        assert!((a2 * a2 - lam2).abs() < 1e-14);
        assert!((lam2 - 0.207_832_8).abs() < 1e-6);
    }

    #[test]
    fn sarcd_strong_alpha_below_two_over_t_plus_two() {
        let mut lam = 1.0;
        for t in 1..=10_000usize {
            let (a, _, new_lam) = sarcd_strong_params(lam, t, 3, 1.0, 0.1).unwrap();
            assert!(a <= 2.0 / (t as f64 + 2.0) + 1e-15, "t={t}");
            lam = new_lam;
        }
    }

    #[test]
    fn sarcd_strong_l1_equals_l0() {
        let (_, l0, _) = sarcd_strong_params(1.0, 0, 4, 2.0, 0.3).unwrap();
        let (_, l1, _) = sarcd_strong_params(1.0, 1, 4, 2.0, 0.3).unwrap();
        assert_eq!(l0, l1);
    }

    #[test]
    fn sarcd_strong_rejects_bad_lambda() {
        assert!(sarcd_strong_params(0.0, 5, 2, 1.0, 0.5).is_err());
        assert!(sarcd_strong_params(-0.1, 5, 2, 1.0, 0.5).is_err());
    }

    #[test]
    fn oarcd_general_first_step_equals_l() {
        let p = oarcd_general_params(1, 2.0, 0.5).unwrap();
        assert_eq!(p.l_t, 2.0);
        assert_eq!(p.alpha_t, 0.5);
    }

    #[test]
    fn oarcd_general_direct_evaluation() {
        // t=5, alpha=0.5, L=2: L_5 = 0.5 * 2 * 2 + 2 = 4
        let p = oarcd_general_params(5, 2.0, 0.5).unwrap();
        assert_eq!(p.l_t, 4.0);
    }

    #[test]
    fn oarcd_general_exceeds_l_from_t2() {
        for t in 2..1000 {
            let p = oarcd_general_params(t, 1.5, 0.25).unwrap();
            assert!(p.l_t > 1.5);
        }
    }

    #[test]
    fn oarcd_general_rejects_alpha_out_of_range() {
        assert!(oarcd_general_params(1, 1.0, 0.0).is_err());
        assert!(oarcd_general_params(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn oarcd_strong_direct_evaluation() {
        // t=1, alpha=0.5, mu=2, L=1: L_1 = 2
        let p = oarcd_strong_params(1, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(p.l_t, 2.0);
    }

    #[test]
    fn oarcd_strong_linear_increments() {
        let mut prev = oarcd_strong_params(1, 1.0, 0.4, 0.3).unwrap();
        for t in 2..200 {
            let p = oarcd_strong_params(t, 1.0, 0.4, 0.3).unwrap();
            assert!((p.l_t - prev.l_t - 0.3 * 0.4).abs() < 1e-12);
            prev = p;
        }
    }

    #[test]
    fn oarcd_strong_rejects_zero_mu() {
        assert!(oarcd_strong_params(1, 1.0, 0.0, 0.5).is_err());
    }
}
