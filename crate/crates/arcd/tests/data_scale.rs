//! Dataset ingestion at realistic scales, plus the planted-solution
//! recovery check for the synthetic generator.

use std::io::Write;
use std::time::Instant;

use arcd::config::LossKind;
use arcd::data::{load_csv, load_libsvm, synth_quadratic};
use arcd::losses::LossModel;
use arcd::metrics::full_dataset_comparator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An abalone-shaped CSV (4177 rows, 7 features + label) parses to the
/// expected dimensions.
#[test]
fn abalone_shaped_csv_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    for _ in 0..4177 {
        let cells: Vec<String> = (0..8)
            .map(|_| format!("{:.4}", rng.random_range(0.0..1.0)))
            .collect();
        writeln!(file, "{}", cells.join(",")).unwrap();
    }
    let ds = load_csv(file.path(), 7, false).unwrap();
    assert_eq!(ds.n, 7);
    assert_eq!(ds.m(), 4177);
}

/// A dorothea-scale sparse file (n = 100000, ~1950 rows) loads in under
/// two seconds.
#[test]
fn dorothea_scale_libsvm_loads_quickly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let n = 100_000usize;
    for row in 0..1950 {
        let label = if row % 2 == 0 { "+1" } else { "-1" };
        let mut line = String::from(label);
        let nnz = rng.random_range(30..60);
        let mut indices: Vec<usize> = (0..nnz).map(|_| rng.random_range(1..=n)).collect();
        indices.sort_unstable();
        indices.dedup();
        for idx in indices {
            line.push_str(&format!(" {idx}:{:.3}", rng.random_range(0.1..1.0)));
        }
        writeln!(file, "{line}").unwrap();
    }
    // make n exactly 100000 regardless of the random draw
    writeln!(file, "+1 100000:1.0").unwrap();
    file.flush().unwrap();

    let start = Instant::now();
    let ds = load_libsvm(file.path(), None).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(ds.n, 100_000);
    assert_eq!(ds.m(), 1951);
    assert!(
        elapsed.as_secs_f64() < 2.0,
        "load took {:.3}s",
        elapsed.as_secs_f64()
    );
}

/// Noise-free synthetic targets let the comparator recover the planted
/// vector to 1e-6.
#[test]
fn comparator_recovers_planted_solution() {
    let (ds, planted) = synth_quadratic(6, 40, 10.0, 0.0, 15).unwrap();
    let loss = LossModel::new(LossKind::Squared, 0.0, &ds).unwrap();
    let (res, f_star) = full_dataset_comparator(&loss).unwrap();
    for (got, want) in res.y_star.iter().zip(&planted) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!(f_star.abs() < 1e-12);
}

/// Unit row normalization makes the squared-loss smoothness constant 1.
#[test]
fn unit_normalization_gives_unit_smoothness() {
    let (ds, _) = synth_quadratic(5, 30, 4.0, 0.1, 8).unwrap();
    let ds = arcd::data::normalize(&ds, arcd::config::Normalization::UnitRowNorm);
    let loss = LossModel::new(LossKind::Squared, 0.0, &ds).unwrap();
    let l = loss.smoothness_constant().unwrap();
    assert!((l - 1.0).abs() < 1e-12, "L = {l}");
}
