//! The accelerated three-sequence steppers.
//!
//! One core drives the whole family: the stochastic and online variants
//! share the x-blend and the closed-form y subproblem and differ only in
//! the momentum coefficient, and the SAGE-style baselines are the same
//! updates with the identity coordinate matrix and every scalar formula
//! evaluated at n = 1.
//!
//! Per step, with drawn sample xi and coordinate k (g_k the partial at the
//! extrapolation point x_t):
//!
//! ```text
//! x_t = (1 - alpha_t) y_{t-1} + alpha_t z_{t-1}
//! y_t = x_t - (a(n)/L_t) g_k e_k
//! z_t = z_{t-1} - c [ (n L_t / (a(n) b(n))) (x_t - y_t) + (mu / b(n)) (z_{t-1} - x_t) ]
//! ```
//!
//! The y-update is the exact argmin of the one-sparse quadratic
//! subproblem, so `a(n) g_k + L_t (y_t[k] - x_t[k]) = 0` holds to
//! rounding. The online variant evaluates the round gradient at x_t.

use crate::config::{Regime, RunConfig};
use crate::error::{Error, Result};
use crate::lazy::ScaledPair;
use crate::losses::{norm_sq, LossModel};
use crate::sampler::CoordinateSampler;
use crate::schedules::{Schedule, ScheduleKind};
use crate::state::{init_state, IndexOrigin};
use crate::steppers::{StepReport, Stepper};

/// Gradient source: one random coordinate, or the full vector (SAGE).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMode {
    Coordinate,
    Full,
}

#[derive(Debug, Clone, Copy)]
enum Variant {
    Sarcd,
    Oarcd,
}

impl Variant {
    /// The scalar multiplying the bracket in the momentum update.
    fn z_coefficient(self, a: f64, b: f64, n: f64, l_t: f64, alpha: f64, mu: f64) -> f64 {
        match self {
            Variant::Sarcd => a * b * b / (n * l_t * alpha + mu * a * b),
            Variant::Oarcd => a * b * b * alpha / (n * l_t + a * b * alpha * mu),
        }
    }
}

enum Repr {
    Dense {
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
        started: bool,
    },
    Lazy(ScaledPair),
}

pub struct AccelStepper {
    name: &'static str,
    variant: Variant,
    schedule: Schedule,
    mode: GradMode,
    sampler: Option<CoordinateSampler>,
    mu: f64,
    a_n: f64,
    b_n: f64,
    n_scale: f64,
    repr: Repr,
    /// Step index of the last completed step in the algorithm's own
    /// convention (-1 / 0 before any step).
    t: i64,
    steps: usize,
}

/// Stochastic accelerated randomized coordinate descent.
pub fn sarcd(
    n: usize,
    l: f64,
    cfg: &RunConfig,
    start: Option<&[f64]>,
    mode: GradMode,
) -> Result<AccelStepper> {
    let kind = match cfg.regime {
        Regime::General => ScheduleKind::SarcdGeneral { b: cfg.b },
        Regime::Strong => ScheduleKind::SarcdStrong,
    };
    let scalar_n = if mode == GradMode::Full { 1 } else { n };
    let schedule = Schedule::new(kind, scalar_n, l, cfg.mu)?;
    AccelStepper::new(
        if mode == GradMode::Full {
            "sage"
        } else {
            "sarcd"
        },
        Variant::Sarcd,
        schedule,
        mode,
        n,
        cfg,
        start,
        IndexOrigin::Stochastic,
    )
}

/// Online accelerated randomized coordinate descent.
pub fn oarcd(
    n: usize,
    l: f64,
    cfg: &RunConfig,
    start: Option<&[f64]>,
    mode: GradMode,
) -> Result<AccelStepper> {
    let kind = match cfg.regime {
        Regime::General => ScheduleKind::OarcdGeneral { alpha: cfg.alpha },
        Regime::Strong => ScheduleKind::OarcdStrong { alpha: cfg.alpha },
    };
    let scalar_n = if mode == GradMode::Full { 1 } else { n };
    let schedule = Schedule::new(kind, scalar_n, l, cfg.mu)?;
    AccelStepper::new(
        if mode == GradMode::Full {
            "sage"
        } else {
            "oarcd"
        },
        Variant::Oarcd,
        schedule,
        mode,
        n,
        cfg,
        start,
        IndexOrigin::Online,
    )
}

/// SAGE-style online baseline: the online update with the identity
/// coordinate matrix and scalar formulas at n = 1.
pub fn sage_online(
    n: usize,
    l: f64,
    cfg: &RunConfig,
    start: Option<&[f64]>,
) -> Result<AccelStepper> {
    oarcd(n, l, cfg, start, GradMode::Full)
}

/// SAGE-style stochastic baseline; degenerate stochastic instantiation.
pub fn sage_stochastic(
    n: usize,
    l: f64,
    cfg: &RunConfig,
    start: Option<&[f64]>,
) -> Result<AccelStepper> {
    sarcd(n, l, cfg, start, GradMode::Full)
}

impl AccelStepper {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &'static str,
        variant: Variant,
        schedule: Schedule,
        mode: GradMode,
        n: usize,
        cfg: &RunConfig,
        start: Option<&[f64]>,
        origin: IndexOrigin,
    ) -> Result<AccelStepper> {
        let state = init_state(n, start, origin)?;
        let sampler = match mode {
            GradMode::Coordinate => Some(CoordinateSampler::new(n, cfg.seed)?),
            GradMode::Full => None,
        };
        if cfg.lazy_rep && mode == GradMode::Full {
            return Err(Error::config(
                "lazy representation applies to coordinate updates only",
            ));
        }
        if cfg.lazy_rep && cfg.mu > 0.0 {
            return Err(Error::config(
                "lazy representation requires mu = 0 (one-sparse momentum update)",
            ));
        }
        let repr = if cfg.lazy_rep {
            Repr::Lazy(ScaledPair::new(state.y.clone(), state.z.clone()))
        } else {
            Repr::Dense {
                x: vec![0.0; n],
                y: state.y,
                z: state.z,
                started: false,
            }
        };
        let a_n = schedule.a_n();
        let b_n = schedule.b_n();
        let n_scale = schedule.n() as f64;
        Ok(AccelStepper {
            name,
            variant,
            schedule,
            mode,
            sampler,
            mu: cfg.mu,
            a_n,
            b_n,
            n_scale,
            repr,
            t: state.t,
            steps: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        match &self.repr {
            Repr::Dense { y, .. } => y.len(),
            Repr::Lazy(pair) => pair.dimension(),
        }
    }

    fn step_error(&self, t: usize, sample: usize, k: Option<usize>, what: &str) -> Error {
        Error::Step {
            step: t,
            sample,
            coordinate: k,
            message: what.to_string(),
        }
    }

    fn dense_step(
        &mut self,
        loss: &LossModel,
        sample: usize,
        t: usize,
        alpha: f64,
        l_t: f64,
    ) -> Result<StepReport> {
        let (a_n, b_n, n_s, mu) = (self.a_n, self.b_n, self.n_scale, self.mu);
        let variant = self.variant;
        let sampler = self.sampler.as_mut();
        let Repr::Dense { x, y, z, started } = &mut self.repr else {
            unreachable!("dense_step on lazy repr");
        };
        for i in 0..x.len() {
            x[i] = (1.0 - alpha) * y[i] + alpha * z[i];
        }
        *started = true;

        let report = match self.mode {
            GradMode::Coordinate => {
                let k = sampler
                    .expect("coordinate mode has a sampler")
                    .sample_coordinate();
                let g_k = loss.coordinate_partial(x, sample, k)?;
                if !g_k.is_finite() {
                    let err = Error::Step {
                        step: t,
                        sample,
                        coordinate: Some(k),
                        message: format!("non-finite partial derivative {g_k}"),
                    };
                    return Err(err);
                }
                let s_y = a_n / l_t * g_k;
                y.copy_from_slice(x);
                y[k] -= s_y;
                let c = variant.z_coefficient(a_n, b_n, n_s, l_t, alpha, mu);
                let stiff = n_s * l_t / (a_n * b_n);
                if mu > 0.0 {
                    let damp = mu / b_n;
                    for i in 0..z.len() {
                        let sparse = if i == k { stiff * s_y } else { 0.0 };
                        z[i] -= c * (sparse + damp * (z[i] - x[i]));
                    }
                } else {
                    z[k] -= c * (stiff * s_y);
                }
                StepReport {
                    t,
                    sample,
                    coordinate: Some(k),
                    partial: g_k,
                    alpha_t: alpha,
                    l_t,
                    delta_norm: a_n * g_k.abs(),
                    y_coordinates_written: 1,
                    z_coordinates_written: if mu > 0.0 { z.len() } else { 1 },
                }
            }
            GradMode::Full => {
                let mut g = loss.sample_gradient(x, sample)?;
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Step {
                        step: t,
                        sample,
                        coordinate: None,
                        message: "non-finite gradient".to_string(),
                    });
                }
                let g_norm = norm_sq(&g).sqrt();
                // reuse g as the per-coordinate subproblem step s_i
                for gi in g.iter_mut() {
                    *gi *= a_n / l_t;
                }
                for i in 0..y.len() {
                    y[i] = x[i] - g[i];
                }
                let c = variant.z_coefficient(a_n, b_n, n_s, l_t, alpha, mu);
                let stiff = n_s * l_t / (a_n * b_n);
                let damp = mu / b_n;
                if mu > 0.0 {
                    for i in 0..z.len() {
                        z[i] -= c * (stiff * g[i] + damp * (z[i] - x[i]));
                    }
                } else {
                    for i in 0..z.len() {
                        z[i] -= c * (stiff * g[i]);
                    }
                }
                StepReport {
                    t,
                    sample,
                    coordinate: None,
                    partial: g_norm,
                    alpha_t: alpha,
                    l_t,
                    delta_norm: a_n * g_norm,
                    y_coordinates_written: y.len(),
                    z_coordinates_written: z.len(),
                }
            }
        };
        Ok(report)
    }

    fn lazy_step(
        &mut self,
        loss: &LossModel,
        sample: usize,
        t: usize,
        alpha: f64,
        l_t: f64,
    ) -> Result<StepReport> {
        let (a_n, b_n, n_s) = (self.a_n, self.b_n, self.n_scale);
        let variant = self.variant;
        let k = self
            .sampler
            .as_mut()
            .expect("lazy mode is coordinate mode")
            .sample_coordinate();
        let (xc, g_k) = {
            let Repr::Lazy(pair) = &self.repr else {
                unreachable!("lazy_step on dense repr");
            };
            let xc = pair.x_coeffs(alpha);
            let row = loss.row(sample);
            let a_k = row.get(k);
            let g_k = if a_k == 0.0 {
                0.0
            } else {
                let pred = pair.dot_row(row, xc);
                loss.dloss_dpred(pred, sample) * a_k
            };
            (xc, g_k)
        };
        if !g_k.is_finite() {
            return Err(self.step_error(t, sample, Some(k), "non-finite partial derivative"));
        }
        let s_y = a_n / l_t * g_k;
        let c = variant.z_coefficient(a_n, b_n, n_s, l_t, alpha, 0.0);
        let s_z = c * (n_s * l_t / (a_n * b_n) * s_y);
        let Repr::Lazy(pair) = &mut self.repr else {
            unreachable!();
        };
        if !pair.commit_step(xc, k, s_y, s_z) {
            pair.rebase();
            let xc = pair.x_coeffs(alpha);
            if !pair.commit_step(xc, k, s_y, s_z) {
                // x lies on z exactly (alpha = 1): apply the step densely
                let y_old = pair.y_dense();
                let mut z = pair.z_dense();
                let mut y: Vec<f64> = y_old
                    .iter()
                    .zip(&z)
                    .map(|(yi, zi)| (1.0 - alpha) * yi + alpha * zi)
                    .collect();
                y[k] -= s_y;
                z[k] -= s_z;
                pair.reset(y, z);
            }
        }
        Ok(StepReport {
            t,
            sample,
            coordinate: Some(k),
            partial: g_k,
            alpha_t: alpha,
            l_t,
            delta_norm: a_n * g_k.abs(),
            y_coordinates_written: 1,
            z_coordinates_written: 1,
        })
    }
}

impl Stepper for AccelStepper {
    fn name(&self) -> &'static str {
        self.name
    }

    fn step(&mut self, loss: &LossModel, sample: usize) -> Result<StepReport> {
        let t = (self.t + 1) as usize;
        let params = self.schedule.params_at(t)?;
        let report = match self.repr {
            Repr::Dense { .. } => self.dense_step(loss, sample, t, params.alpha_t, params.l_t)?,
            Repr::Lazy(_) => self.lazy_step(loss, sample, t, params.alpha_t, params.l_t)?,
        };
        self.t += 1;
        self.steps += 1;
        Ok(report)
    }

    fn loss_at(&self, loss: &LossModel, sample: usize) -> f64 {
        match &self.repr {
            Repr::Dense { y, .. } => {
                let pred = loss.predict(y, sample);
                let y_norm_sq = if self.mu > 0.0 { norm_sq(y) } else { 0.0 };
                loss.loss_from_pred(pred, sample, y_norm_sq)
            }
            Repr::Lazy(pair) => {
                let pred = pair.dot_row(loss.row(sample), pair.y_coeffs());
                loss.loss_from_pred(pred, sample, 0.0)
            }
        }
    }

    fn margin_at(&self, loss: &LossModel, sample: usize) -> f64 {
        match &self.repr {
            Repr::Dense { y, .. } => loss.predict(y, sample),
            Repr::Lazy(pair) => pair.dot_row(loss.row(sample), pair.y_coeffs()),
        }
    }

    fn snapshot(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense { y, .. } => y.clone(),
            Repr::Lazy(pair) => pair.y_dense(),
        }
    }

    fn momentum_snapshot(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense { z, .. } => z.clone(),
            Repr::Lazy(pair) => pair.z_dense(),
        }
    }

    fn extrapolation_snapshot(&self) -> Option<Vec<f64>> {
        match &self.repr {
            Repr::Dense { x, started, .. } if *started => Some(x.clone()),
            _ => None,
        }
    }

    fn steps_taken(&self) -> usize {
        self.steps
    }
}
