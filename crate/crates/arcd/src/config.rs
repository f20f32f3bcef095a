//! Run configuration shared by the optimizers, the runner, and the CLI.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The optimizer family member to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    Sarcd,
    Oarcd,
    Sgd,
    Ogd,
    Orbcd,
    Sage,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::Sarcd,
        AlgorithmId::Oarcd,
        AlgorithmId::Sgd,
        AlgorithmId::Ogd,
        AlgorithmId::Orbcd,
        AlgorithmId::Sage,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmId::Sarcd => "sarcd",
            AlgorithmId::Oarcd => "oarcd",
            AlgorithmId::Sgd => "sgd",
            AlgorithmId::Ogd => "ogd",
            AlgorithmId::Orbcd => "orbcd",
            AlgorithmId::Sage => "sage",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown algorithm {s:?}; expected one of sarcd, oarcd, sgd, ogd, orbcd, sage"
                ))
            })
    }
}

/// Convexity regime: `Strong` requires mu > 0, `General` forces mu = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    General,
    Strong,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::General => "general",
            Regime::Strong => "strong",
        }
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Regime::General),
            "strong" => Ok(Regime::Strong),
            other => Err(Error::config(format!(
                "unknown regime {other:?}; expected general or strong"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Squared,
    Logistic,
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(LossKind::Squared),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::config(format!(
                "unknown loss {other:?}; expected squared or logistic"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    UnitRowNorm,
    MinMax,
}

impl Normalization {
    pub fn name(&self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::UnitRowNorm => "unit",
            Normalization::MinMax => "minmax",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "unit" => Ok(Normalization::UnitRowNorm),
            "minmax" => Ok(Normalization::MinMax),
            other => Err(Error::config(format!(
                "unknown normalization {other:?}; expected none, unit or minmax"
            ))),
        }
    }
}

/// How the run consumes data samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Uniform with replacement (stochastic optimization).
    UniformWithReplacement,
    /// Stream order, cyclic when the horizon exceeds the sample count
    /// (online learning).
    Sequential,
}

/// Full configuration of a single optimizer run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algo: AlgorithmId,
    pub regime: Regime,
    pub horizon: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub mu: f64,
    /// Free constant in the SARCD general-convex L_t schedule.
    pub b: f64,
    /// Constant blending weight for OARCD and SAGE, in (0,1).
    pub alpha: f64,
    /// Baseline step-size constant: eta_t = eta_c / sqrt(t) in the general
    /// regime.
    pub eta_c: f64,
    /// Objective-recording cadence; 0 selects max(1, horizon/1000).
    pub emit_every: usize,
    /// Use the scaled two-vector representation in the accelerated steppers.
    pub lazy_rep: bool,
    /// Track analysis constants (sigma, D, R, G) during the run.
    pub diagnostics: bool,
}

impl RunConfig {
    pub fn new(algo: AlgorithmId, regime: Regime, horizon: usize, seed: u64) -> Self {
        RunConfig {
            algo,
            regime,
            horizon,
            seed,
            loss: LossKind::Squared,
            mu: 0.0,
            b: 1.0,
            alpha: 0.5,
            eta_c: 1.0,
            emit_every: 0,
            lazy_rep: false,
            diagnostics: false,
        }
    }

    /// Checks regime/constant consistency and applies the regime's mu rule:
    /// the strong regime requires mu > 0, the general regime forces mu = 0.
    pub fn validated(mut self) -> Result<Self> {
        match self.regime {
            Regime::Strong if self.mu <= 0.0 => {
                return Err(Error::config("strong regime requires mu > 0"));
            }
            Regime::General => {
                self.mu = 0.0;
            }
            _ => {}
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.b <= 0.0 {
            return Err(Error::config(format!("b must be > 0, got {}", self.b)));
        }
        if self.eta_c <= 0.0 {
            return Err(Error::config(format!(
                "eta-c must be > 0, got {}",
                self.eta_c
            )));
        }
        Ok(self)
    }

    /// Data consumption order implied by the algorithm.
    pub fn sampling_mode(&self) -> SamplingMode {
        match self.algo {
            AlgorithmId::Sarcd | AlgorithmId::Sgd => SamplingMode::UniformWithReplacement,
            AlgorithmId::Oarcd | AlgorithmId::Ogd | AlgorithmId::Orbcd | AlgorithmId::Sage => {
                SamplingMode::Sequential
            }
        }
    }

    /// Effective diagnostic-recording cadence.
    pub fn cadence(&self) -> usize {
        if self.emit_every > 0 {
            self.emit_every
        } else {
            (self.horizon / 1000).max(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_regime_needs_positive_mu() {
        let cfg = RunConfig::new(AlgorithmId::Sarcd, Regime::Strong, 10, 1);
        assert!(cfg.validated().is_err());
    }

    #[test]
    fn general_regime_zeroes_mu() {
        let mut cfg = RunConfig::new(AlgorithmId::Sarcd, Regime::General, 10, 1);
        cfg.mu = 0.5;
        let cfg = cfg.validated().unwrap();
        assert_eq!(cfg.mu, 0.0);
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for algo in AlgorithmId::ALL {
            assert_eq!(algo.name().parse::<AlgorithmId>().unwrap(), algo);
        }
        assert!("nadam".parse::<AlgorithmId>().is_err());
    }

    #[test]
    fn default_cadence_is_horizon_over_1000() {
        let cfg = RunConfig::new(AlgorithmId::Sarcd, Regime::General, 10_000, 1);
        assert_eq!(cfg.cadence(), 10);
        let short = RunConfig::new(AlgorithmId::Sarcd, Regime::General, 5, 1);
        assert_eq!(short.cadence(), 1);
    }
}
