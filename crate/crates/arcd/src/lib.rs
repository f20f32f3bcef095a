//! Accelerated randomized coordinate descent for stochastic optimization
//! and online learning.
//!
//! The crate implements two accelerated methods that update a single random
//! coordinate per step — SARCD (stochastic, samples drawn with replacement)
//! and OARCD (online, samples arrive as a stream) — together with the
//! parameter schedules that give them their convergence and regret
//! guarantees, reference baselines (SGD, OGD, ORBCD, SAGE-style full
//! gradient), regret/suboptimality metrics with an offline comparator, and
//! dataset ingestion for dense CSV and sparse LIBSVM files.
//!
//! Every optimizer is registered by name behind the [`steppers::Stepper`]
//! trait and selected at runtime; see [`steppers::registry`].

pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod lazy;
pub mod losses;
pub mod metrics;
pub mod runner;
pub mod sampler;
pub mod schedules;
pub mod state;
pub mod steppers;
pub mod trace;

pub use config::{AlgorithmId, LossKind, Normalization, Regime, RunConfig};
pub use data::Dataset;
pub use error::{Error, Result};
pub use losses::LossModel;
pub use runner::{run, run_with_reference, RunTrace};
pub use state::OptimizerState;
