//! Analytic-gradient and convexity properties of the loss models,
//! checked against independent numerical oracles.

use arcd::config::{LossKind, Normalization};
use arcd::data::{Dataset, Row};
use arcd::losses::LossModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(kind: LossKind, n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Row> = (0..m)
        .map(|_| Row::Dense((0..n).map(|_| rng.random_range(-2.0..2.0)).collect()))
        .collect();
    let labels: Vec<f64> = (0..m)
        .map(|_| match kind {
            LossKind::Squared => rng.random_range(-3.0..3.0),
            LossKind::Logistic => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    Dataset {
        rows,
        labels,
        n,
        normalization: Normalization::None,
        provenance: "prop".into(),
    }
}

/// Central finite difference of the per-sample loss.
fn fd_gradient(loss: &LossModel, y: &[f64], sample: usize, h: f64) -> Vec<f64> {
    (0..y.len())
        .map(|k| {
            let mut plus = y.to_vec();
            let mut minus = y.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (loss.loss_value(&plus, sample).unwrap() - loss.loss_value(&minus, sample).unwrap())
                / (2.0 * h)
        })
        .collect()
}

/// 100 random probes per loss kind: analytic vs central differences at
/// h = 1e-6, relative error <= 1e-4.
#[test]
fn gradient_matches_finite_differences_on_probe_set() {
    for (kind, mu) in [
        (LossKind::Squared, 0.0),
        (LossKind::Squared, 0.3),
        (LossKind::Logistic, 0.0),
        (LossKind::Logistic, 0.3),
    ] {
        let ds = random_dataset(kind, 4, 10, 42);
        let loss = LossModel::new(kind, mu, &ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for probe in 0..100 {
            let y: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let sample = rng.random_range(0..10);
            let grad = loss.sample_gradient(&y, sample).unwrap();
            let fd = fd_gradient(&loss, &y, sample, 1e-6);
            for k in 0..4 {
                let scale = grad[k].abs().max(1e-3);
                assert!(
                    (grad[k] - fd[k]).abs() / scale <= 1e-4,
                    "{kind:?} mu={mu} probe {probe} k={k}: {} vs {}",
                    grad[k],
                    fd[k]
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// coordinate_partial agrees with the full gradient entry everywhere.
    #[test]
    fn partial_equals_gradient_entry(
        seed in 0u64..1000,
        y0 in -3.0f64..3.0,
        y1 in -3.0f64..3.0,
        y2 in -3.0f64..3.0,
        mu in 0.0f64..0.5,
        logistic in proptest::bool::ANY,
    ) {
        let kind = if logistic { LossKind::Logistic } else { LossKind::Squared };
        let ds = random_dataset(kind, 3, 5, seed);
        let loss = LossModel::new(kind, mu, &ds).unwrap();
        let y = [y0, y1, y2];
        for sample in 0..5 {
            let grad = loss.sample_gradient(&y, sample).unwrap();
            for k in 0..3 {
                let partial = loss.coordinate_partial(&y, sample, k).unwrap();
                prop_assert!((partial - grad[k]).abs() <= 1e-12 * (1.0 + grad[k].abs()));
            }
        }
    }

    /// Convexity spot-check on the aggregate, and on the deregularized
    /// aggregate when mu > 0.
    #[test]
    fn objective_is_convex_along_segments(
        seed in 0u64..1000,
        theta in 0.01f64..0.99,
        mu in 0.0f64..0.5,
        logistic in proptest::bool::ANY,
    ) {
        let kind = if logistic { LossKind::Logistic } else { LossKind::Squared };
        let ds = random_dataset(kind, 3, 6, seed);
        let loss = LossModel::new(kind, mu, &ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let y1: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y2: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let blend: Vec<f64> = y1
            .iter()
            .zip(&y2)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        let lhs = loss.full_objective(&blend);
        let rhs = theta * loss.full_objective(&y1) + (1.0 - theta) * loss.full_objective(&y2);
        prop_assert!(lhs <= rhs + 1e-10, "{lhs} > {rhs}");

        if mu > 0.0 {
            // strong convexity: removing the l2 term keeps convexity
            let dereg = |y: &[f64]| {
                loss.full_objective(y) - 0.5 * mu * y.iter().map(|v| v * v).sum::<f64>()
            };
            prop_assert!(dereg(&blend) <= theta * dereg(&y1) + (1.0 - theta) * dereg(&y2) + 1e-10);
        }
    }

    /// Descent lemma with the model's smoothness constant.
    #[test]
    fn descent_lemma_holds_with_reported_smoothness(
        seed in 0u64..1000,
        mu in 0.0f64..0.5,
        logistic in proptest::bool::ANY,
    ) {
        let kind = if logistic { LossKind::Logistic } else { LossKind::Squared };
        let ds = random_dataset(kind, 3, 6, seed);
        let loss = LossModel::new(kind, mu, &ds).unwrap();
        let l = loss.smoothness_constant().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1234);
        for _ in 0..4 {
            let y1: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y2: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = loss.full_gradient(&y1);
            let inner: f64 = g.iter().zip(y2.iter().zip(&y1)).map(|(gi, (a, b))| gi * (a - b)).sum();
            let dist_sq: f64 = y1.iter().zip(&y2).map(|(a, b)| (a - b) * (a - b)).sum();
            let bound = loss.full_objective(&y1) + inner + 0.5 * l * dist_sq;
            prop_assert!(loss.full_objective(&y2) <= bound + 1e-10);
        }
    }
}

/// Mean of per-sample gradients equals the aggregate gradient to 1e-12.
#[test]
fn sample_gradients_average_to_full_gradient() {
    for kind in [LossKind::Squared, LossKind::Logistic] {
        let ds = random_dataset(kind, 5, 12, 11);
        let loss = LossModel::new(kind, 0.2, &ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let full = loss.full_gradient(&y);
        let mut mean = [0.0; 5];
        for i in 0..12 {
            for (acc, g) in mean.iter_mut().zip(loss.sample_gradient(&y, i).unwrap()) {
                *acc += g / 12.0;
            }
        }
        for k in 0..5 {
            assert!(
                (mean[k] - full[k]).abs() <= 1e-12 * (1.0 + full[k].abs()),
                "{kind:?} k={k}"
            );
        }
    }
}

/// Uniform single-sample draws estimate the full objective: Monte Carlo
/// with 1e5 draws lands within 1% relative error.
#[test]
fn monte_carlo_sampling_is_unbiased() {
    let ds = random_dataset(LossKind::Squared, 3, 8, 19);
    let loss = LossModel::new(LossKind::Squared, 0.1, &ds).unwrap();
    let y = [0.4, -0.7, 1.1];
    let exact = loss.full_objective(&y);
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let draws = 100_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        let i = rng.random_range(0..8);
        acc += loss.loss_value(&y, i).unwrap();
    }
    let estimate = acc / draws as f64;
    assert!(
        (estimate - exact).abs() / exact.abs() <= 0.01,
        "{estimate} vs {exact}"
    );
}

/// Sparse and dense encodings of the same data give identical losses and
/// gradients to 1e-12.
#[test]
fn sparse_dense_equivalence() {
    let dense = Dataset {
        rows: vec![
            Row::Dense(vec![0.0, 1.5, 0.0, -2.0]),
            Row::Dense(vec![3.0, 0.0, 0.0, 0.5]),
        ],
        labels: vec![1.0, -1.0],
        n: 4,
        normalization: Normalization::None,
        provenance: "dense".into(),
    };
    let sparse = Dataset {
        rows: vec![
            Row::Sparse(vec![(1, 1.5), (3, -2.0)]),
            Row::Sparse(vec![(0, 3.0), (3, 0.5)]),
        ],
        labels: vec![1.0, -1.0],
        n: 4,
        normalization: Normalization::None,
        provenance: "sparse".into(),
    };
    for kind in [LossKind::Squared, LossKind::Logistic] {
        let a = LossModel::new(kind, 0.05, &dense).unwrap();
        let b = LossModel::new(kind, 0.05, &sparse).unwrap();
        let y = [0.3, -0.2, 0.9, 0.7];
        for i in 0..2 {
            assert!((a.loss_value(&y, i).unwrap() - b.loss_value(&y, i).unwrap()).abs() < 1e-12);
            let (ga, gb) = (
                a.sample_gradient(&y, i).unwrap(),
                b.sample_gradient(&y, i).unwrap(),
            );
            for k in 0..4 {
                assert!((ga[k] - gb[k]).abs() < 1e-12);
            }
        }
        assert_eq!(
            a.smoothness_constant().unwrap(),
            b.smoothness_constant().unwrap()
        );
    }
}
