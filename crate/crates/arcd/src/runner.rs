//! The run driver: iterates a configured stepper over a dataset and
//! records a per-step trace.
//!
//! Online runs consume samples in stream order (cyclic past the end, and
//! flagged); stochastic runs draw uniformly with replacement. Each round
//! records two losses on the round's sample: the strict-protocol loss at
//! the pre-update iterate and the charged loss at the post-update iterate.

use std::time::Instant;

use crate::config::RunConfig;
use crate::data::Dataset;
use crate::diagnostics::Measured;
use crate::error::Result;
use crate::losses::LossModel;
use crate::sampler::DataSampler;
use crate::steppers::{build_stepper, protocol_of, Protocol};

/// One completed step's record.
#[derive(Debug, Clone)]
pub struct StepRow {
    /// 1-based count of completed steps.
    pub step: usize,
    /// Step index in the algorithm's own convention.
    pub t: usize,
    pub sample: usize,
    pub coordinate: Option<usize>,
    /// Loss on the round's sample at the pre-update iterate.
    pub strict_loss: f64,
    /// Loss on the round's sample at the post-update iterate.
    pub charged_loss: f64,
    /// Prefix sum of charged losses.
    pub cumulative_loss: f64,
    /// Linear prediction at the pre-update iterate (classification stats).
    pub margin_pre: f64,
    pub alpha_t: f64,
    pub l_t: f64,
    /// Cumulative wall clock since run start, nanoseconds.
    pub wall_ns: u128,
    pub y_written: usize,
    pub z_written: usize,
}

/// Full record of one run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub config: RunConfig,
    pub protocol: Protocol,
    pub steps: Vec<StepRow>,
    /// `(steps_completed, full_objective)` at the recording cadence;
    /// row 0 is the initial point. Populated for stochastic runs.
    pub objective_rows: Vec<(usize, f64)>,
    pub final_iterate: Vec<f64>,
    /// Smoothness constant the schedules were built with.
    pub l_used: f64,
    /// Analysis constants observed during the run (diagnostics mode).
    pub measured: Measured,
    /// True when an online run wrapped past the end of the sample stream.
    pub cyclic_wrapped: bool,
}

impl RunTrace {
    pub fn charged_losses(&self) -> Vec<f64> {
        self.steps.iter().map(|r| r.charged_loss).collect()
    }

    pub fn strict_losses(&self) -> Vec<f64> {
        self.steps.iter().map(|r| r.strict_loss).collect()
    }

    /// The sample stream the run consumed, in order.
    pub fn round_samples(&self) -> Vec<usize> {
        self.steps.iter().map(|r| r.sample).collect()
    }
}

/// Runs the configured algorithm for `config.horizon` steps.
pub fn run(config: &RunConfig, data: &Dataset) -> Result<RunTrace> {
    run_with_reference(config, data, None)
}

/// As [`run`], additionally measuring distances to a reference point
/// (the offline comparator) when diagnostics are enabled.
pub fn run_with_reference(
    config: &RunConfig,
    data: &Dataset,
    reference: Option<&[f64]>,
) -> Result<RunTrace> {
    let config = config.clone().validated()?;
    let loss = LossModel::new(config.loss, config.mu, data)?;
    let l_used = loss.smoothness_constant()?;
    let protocol = protocol_of(config.algo);
    let mut stepper = build_stepper(&config, &loss)?;

    let horizon = config.horizon;
    let cadence = config.cadence();
    let m = data.m();
    let mut data_sampler = DataSampler::new(m, config.seed)?;

    let mut steps = Vec::with_capacity(horizon);
    let mut objective_rows = Vec::new();
    let mut cumulative_loss = 0.0;
    let mut cyclic_wrapped = false;
    let mut measured = Measured::new(l_used);

    if protocol == Protocol::Stochastic || config.diagnostics {
        objective_rows.push((0, loss.full_objective(&stepper.snapshot())));
    }

    let clock = Instant::now();
    for count in 1..=horizon {
        let sample = match protocol {
            Protocol::Stochastic => data_sampler.sample(),
            Protocol::Online => {
                let idx = count - 1;
                if idx >= m {
                    cyclic_wrapped = true;
                }
                idx % m
            }
        };

        let strict_loss = stepper.loss_at(&loss, sample);
        let margin_pre = stepper.margin_at(&loss, sample);
        if config.diagnostics {
            measured.observe_gradient_norm(&loss, stepper.as_ref(), sample);
        }

        let report = stepper.step(&loss, sample)?;

        let charged_loss = stepper.loss_at(&loss, sample);
        cumulative_loss += charged_loss;

        if config.diagnostics {
            measured.observe_post_step(
                &loss,
                stepper.as_ref(),
                sample,
                reference,
                count,
                &config,
                l_used,
            );
        }
        if protocol == Protocol::Stochastic && (count % cadence == 0 || count == horizon) {
            let y = stepper.snapshot();
            objective_rows.push((count, loss.full_objective(&y)));
            if config.diagnostics {
                measured.observe_sigma_probe(&loss, stepper.as_ref(), sample);
            }
        }

        steps.push(StepRow {
            step: count,
            t: report.t,
            sample,
            coordinate: report.coordinate,
            strict_loss,
            charged_loss,
            cumulative_loss,
            margin_pre,
            alpha_t: report.alpha_t,
            l_t: report.l_t,
            wall_ns: clock.elapsed().as_nanos(),
            y_written: report.y_coordinates_written,
            z_written: report.z_coordinates_written,
        });
    }

    Ok(RunTrace {
        config,
        protocol,
        steps,
        objective_rows,
        final_iterate: stepper.snapshot(),
        l_used,
        measured,
        cyclic_wrapped,
    })
}
