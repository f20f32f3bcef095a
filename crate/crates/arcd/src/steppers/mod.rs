//! The optimizer family behind a single step interface.
//!
//! Every algorithm variant implements [`Stepper`] and registers itself by
//! name in [`registry`]; the runner and CLI select one at runtime from the
//! configured algorithm id.

mod accel;
mod baselines;

pub use accel::{oarcd, sage_online, sage_stochastic, sarcd, AccelStepper, GradMode};
pub use baselines::{orbcd, sgd_or_ogd, OrbcdStepper, ScalarRuleStepper, StepRule};

use crate::config::{AlgorithmId, Regime, RunConfig};
use crate::error::{Error, Result};
use crate::losses::LossModel;

/// How a run consumes loss information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Draws samples uniformly with replacement; measures suboptimality.
    Stochastic,
    /// Consumes rounds in stream order; measures regret.
    Online,
}

/// One step's bookkeeping.
#[derive(Debug, Clone)]
pub struct StepReport {
    /// Step index in the algorithm's own convention.
    pub t: usize,
    pub sample: usize,
    /// Updated coordinate; `None` for full-gradient variants.
    pub coordinate: Option<usize>,
    /// Partial derivative at the chosen coordinate (or gradient norm for
    /// full-gradient variants).
    pub partial: f64,
    pub alpha_t: f64,
    pub l_t: f64,
    /// Gradient-mapping magnitude `||delta_t|| = a(n) |partial|`.
    pub delta_norm: f64,
    pub y_coordinates_written: usize,
    pub z_coordinates_written: usize,
}

/// A single optimizer run's state-transition interface.
///
/// Iterate access goes through loss/margin queries so that implementations
/// with implicit representations keep their per-step cost; `snapshot` is
/// the explicit (possibly O(n)) escape hatch.
pub trait Stepper: Send {
    fn name(&self) -> &'static str;

    /// Applies one step driven by the given sample.
    fn step(&mut self, loss: &LossModel, sample: usize) -> Result<StepReport>;

    /// Per-sample loss at the current primary iterate.
    fn loss_at(&self, loss: &LossModel, sample: usize) -> f64;

    /// Linear prediction of the current primary iterate on a sample.
    fn margin_at(&self, loss: &LossModel, sample: usize) -> f64;

    /// Explicit copy of the current primary iterate.
    fn snapshot(&self) -> Vec<f64>;

    /// Explicit copy of the momentum iterate (equals the primary iterate
    /// for memoryless baselines).
    fn momentum_snapshot(&self) -> Vec<f64>;

    /// Extrapolation point of the last completed step, where steppers
    /// form one explicitly.
    fn extrapolation_snapshot(&self) -> Option<Vec<f64>> {
        None
    }

    fn steps_taken(&self) -> usize;
}

/// A named algorithm constructor.
pub struct AlgorithmEntry {
    pub id: AlgorithmId,
    pub name: &'static str,
    pub protocol: Protocol,
    pub build: fn(&BuildContext) -> Result<Box<dyn Stepper>>,
}

/// Everything a constructor needs beyond the run configuration.
pub struct BuildContext<'a> {
    pub cfg: &'a RunConfig,
    /// Problem dimension.
    pub n: usize,
    /// Smoothness constant of the loss on this dataset.
    pub l: f64,
}

fn build_sarcd(ctx: &BuildContext) -> Result<Box<dyn Stepper>> {
    Ok(Box::new(accel::sarcd(
        ctx.n,
        ctx.l,
        ctx.cfg,
        None,
        GradMode::Coordinate,
    )?))
}

fn build_oarcd(ctx: &BuildContext) -> Result<Box<dyn Stepper>> {
    Ok(Box::new(accel::oarcd(
        ctx.n,
        ctx.l,
        ctx.cfg,
        None,
        GradMode::Coordinate,
    )?))
}

fn build_sage(ctx: &BuildContext) -> Result<Box<dyn Stepper>> {
    Ok(Box::new(accel::sage_online(ctx.n, ctx.l, ctx.cfg, None)?))
}

fn build_sgd(ctx: &BuildContext) -> Result<Box<dyn Stepper>> {
    Ok(Box::new(sgd_or_ogd("sgd", ctx.n, rule_from(ctx.cfg)?)?))
}

fn build_ogd(ctx: &BuildContext) -> Result<Box<dyn Stepper>> {
    Ok(Box::new(sgd_or_ogd("ogd", ctx.n, rule_from(ctx.cfg)?)?))
}

fn build_orbcd(ctx: &BuildContext) -> Result<Box<dyn Stepper>> {
    Ok(Box::new(orbcd(ctx.n, ctx.cfg.seed, rule_from(ctx.cfg)?)?))
}

fn rule_from(cfg: &RunConfig) -> Result<StepRule> {
    match cfg.regime {
        Regime::Strong => StepRule::inverse_mu_t(cfg.mu),
        Regime::General => StepRule::c_over_sqrt_t(cfg.eta_c),
    }
}

/// The algorithm table: every variant, registered by name.
pub fn registry() -> &'static [AlgorithmEntry] {
    &[
        AlgorithmEntry {
            id: AlgorithmId::Sarcd,
            name: "sarcd",
            protocol: Protocol::Stochastic,
            build: build_sarcd,
        },
        AlgorithmEntry {
            id: AlgorithmId::Oarcd,
            name: "oarcd",
            protocol: Protocol::Online,
            build: build_oarcd,
        },
        AlgorithmEntry {
            id: AlgorithmId::Sgd,
            name: "sgd",
            protocol: Protocol::Stochastic,
            build: build_sgd,
        },
        AlgorithmEntry {
            id: AlgorithmId::Ogd,
            name: "ogd",
            protocol: Protocol::Online,
            build: build_ogd,
        },
        AlgorithmEntry {
            id: AlgorithmId::Orbcd,
            name: "orbcd",
            protocol: Protocol::Online,
            build: build_orbcd,
        },
        AlgorithmEntry {
            id: AlgorithmId::Sage,
            name: "sage",
            protocol: Protocol::Online,
            build: build_sage,
        },
    ]
}

pub fn entry(id: AlgorithmId) -> &'static AlgorithmEntry {
    registry()
        .iter()
        .find(|e| e.id == id)
        .expect("every algorithm id is registered")
}

pub fn protocol_of(id: AlgorithmId) -> Protocol {
    entry(id).protocol
}

/// Builds the configured algorithm against a loss model.
pub fn build_stepper(cfg: &RunConfig, loss: &LossModel) -> Result<Box<dyn Stepper>> {
    let l = loss.smoothness_constant()?;
    let ctx = BuildContext {
        cfg,
        n: loss.dimension(),
        l,
    };
    let entry = registry()
        .iter()
        .find(|e| e.id == cfg.algo)
        .ok_or_else(|| Error::config(format!("algorithm {} not registered", cfg.algo)))?;
    (entry.build)(&ctx)
}
