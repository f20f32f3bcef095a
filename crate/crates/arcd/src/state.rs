//! Three-sequence optimizer state shared by the accelerated methods.

use crate::error::{Error, Result};

/// Step-index convention: SARCD counts steps from 0 with the counter
/// initialized to -1, OARCD counts rounds from 1 with the counter
/// initialized to 0. Keeping both literal keeps the schedule formulas
/// literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrigin {
    /// First step uses t = 0 (counter starts at -1).
    Stochastic,
    /// First step uses t = 1 (counter starts at 0).
    Online,
}

/// The three iterate sequences of an accelerated run.
///
/// `x` is the extrapolation point where gradients are evaluated, `y` the
/// primary iterate, `z` the momentum iterate. `x` is unset until the first
/// step forms it.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub x: Option<Vec<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub t: i64,
}

impl OptimizerState {
    pub fn dimension(&self) -> usize {
        self.y.len()
    }

    /// True when every entry of every populated sequence is finite.
    pub fn is_finite(&self) -> bool {
        let finite = |v: &[f64]| v.iter().all(|e| e.is_finite());
        finite(&self.y) && finite(&self.z) && self.x.as_deref().is_none_or(finite)
    }
}

/// Builds the initial state: `y = z = start` (all-zero by default), `x`
/// unset, step counter at the convention's origin.
pub fn init_state(n: usize, start: Option<&[f64]>, origin: IndexOrigin) -> Result<OptimizerState> {
    if n == 0 {
        return Err(Error::config("model dimension must be >= 1"));
    }
    let start = match start {
        Some(s) if s.len() != n => {
            return Err(Error::config(format!(
                "start vector has dimension {} but n = {n}",
                s.len()
            )));
        }
        Some(s) => s.to_vec(),
        None => vec![0.0; n],
    };
    Ok(OptimizerState {
        x: None,
        y: start.clone(),
        z: start,
        t: match origin {
            IndexOrigin::Stochastic => -1,
            IndexOrigin::Online => 0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_start_is_zero() {
        let s = init_state(3, None, IndexOrigin::Stochastic).unwrap();
        assert_eq!(s.y, vec![0.0, 0.0, 0.0]);
        assert_eq!(s.z, vec![0.0, 0.0, 0.0]);
        assert!(s.x.is_none());
        assert_eq!(s.t, -1);
    }

    #[test]
    fn explicit_start_passthrough() {
        let s = init_state(1, Some(&[5.0]), IndexOrigin::Online).unwrap();
        assert_eq!(s.y, vec![5.0]);
        assert_eq!(s.z, vec![5.0]);
        assert_eq!(s.t, 0);
    }

    #[test]
    fn empty_model_rejected() {
        assert!(init_state(0, None, IndexOrigin::Stochastic).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(init_state(2, Some(&[1.0]), IndexOrigin::Online).is_err());
    }

    #[test]
    fn finiteness_check_covers_all_sequences() {
        let mut s = init_state(2, Some(&[1.0, 2.0]), IndexOrigin::Stochastic).unwrap();
        assert!(s.is_finite());
        s.x = Some(vec![0.5, f64::NAN]);
        assert!(!s.is_finite());
        s.x = None;
        s.z[0] = f64::INFINITY;
        assert!(!s.is_finite());
    }
}
