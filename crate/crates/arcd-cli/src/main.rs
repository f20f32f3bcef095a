//! Experiment harness CLI: configure a run grid, execute it over a worker
//! pool, and emit plot-ready trace files.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;

use arcd::config::{AlgorithmId, LossKind, Normalization, Regime};
use arcd::experiment::{run_experiment, DataSource, ExperimentSpec};

/// Accelerated randomized coordinate descent experiment harness.
///
/// Runs one or more optimizers over a seed list against a dataset (file
/// or synthetic), writes one trace file per (algorithm, seed), a
/// seed-averaged summary per algorithm, and a combined plot file.
#[derive(Debug, Parser)]
#[command(name = "arcd", version, about, long_about = None)]
struct Cli {
    /// Comma-separated algorithm list: sarcd, oarcd, sgd, ogd, orbcd, sage
    #[arg(long, default_value = "oarcd")]
    algo: String,

    /// Convexity regime: general or strong
    #[arg(long, default_value = "general")]
    regime: String,

    /// Loss kind: squared or logistic
    #[arg(long, default_value = "squared")]
    loss: String,

    /// Dataset file; omit to use --synth
    #[arg(long)]
    data: Option<PathBuf>,

    /// Dataset file format: csv or libsvm
    #[arg(long, default_value = "csv")]
    format: String,

    /// 0-based label column for CSV input (default: last column)
    #[arg(long)]
    label_col: Option<usize>,

    /// CSV input has a header row
    #[arg(long, default_value_t = false)]
    has_header: bool,

    /// Feature-count override for LIBSVM input (default: max index seen)
    #[arg(long)]
    n_override: Option<usize>,

    /// Normalization: none, unit or minmax
    #[arg(long, default_value = "unit")]
    normalize: String,

    /// Strong-convexity parameter (strong regime only; general forces 0)
    #[arg(long, default_value_t = 0.1)]
    mu: f64,

    /// Free constant in the stochastic general-convex L_t schedule
    #[arg(long, default_value_t = 1.0)]
    b: f64,

    /// Constant blending weight for the online schedules, in (0,1)
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Baseline step-size constant c in eta_t = c/sqrt(t)
    #[arg(long, default_value_t = 1.0)]
    eta_c: f64,

    /// Horizon (number of steps); 0 means one pass over the data
    #[arg(long = "T", default_value_t = 0)]
    horizon: usize,

    /// Seed list: comma-separated values and/or a..b ranges (exclusive)
    #[arg(long, default_value = "1")]
    seeds: String,

    /// Trace emission cadence; 0 selects max(1, T/1000)
    #[arg(long, default_value_t = 0)]
    emit_every: usize,

    /// Use the scaled two-vector representation (mu = 0 coordinate runs)
    #[arg(long, default_value_t = false)]
    lazy_rep: bool,

    /// Measure analysis constants (sigma, D, R, G) during runs
    #[arg(long, default_value_t = false)]
    diagnostics: bool,

    /// Output directory
    #[arg(long, default_value = "arcd-out")]
    out: PathBuf,

    /// Synthetic problem n,m,condition,noise (used when --data is absent).
    /// With --loss logistic the noise field is the label-flip probability.
    #[arg(long, default_value = "7,4000,10,0.1")]
    synth: String,

    /// Seed of the synthetic data generator
    #[arg(long, default_value_t = 0)]
    synth_seed: u64,

    /// Worker pool size; 0 means available parallelism
    #[arg(long, default_value_t = 0)]
    jobs: usize,

    /// Additionally emit per-prefix-comparator regret files
    #[arg(long, default_value_t = false)]
    prefix_comparator: bool,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo
                .parse()
                .with_context(|| format!("bad seed range {part:?}"))?;
            let hi: u64 = hi
                .parse()
                .with_context(|| format!("bad seed range {part:?}"))?;
            if hi <= lo {
                bail!("empty seed range {part:?}");
            }
            seeds.extend(lo..hi);
        } else {
            seeds.push(part.parse().with_context(|| format!("bad seed {part:?}"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn parse_synth(spec: &str) -> Result<(usize, usize, f64, f64)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        bail!("--synth expects n,m,condition,noise; got {spec:?}");
    }
    Ok((
        parts[0].trim().parse().context("bad synth n")?,
        parts[1].trim().parse().context("bad synth m")?,
        parts[2].trim().parse().context("bad synth condition")?,
        parts[3].trim().parse().context("bad synth noise")?,
    ))
}

fn build_spec(cli: &Cli) -> Result<ExperimentSpec> {
    let algos: Vec<AlgorithmId> = cli
        .algo
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<AlgorithmId>())
        .collect::<arcd::Result<_>>()?;
    let loss: LossKind = cli.loss.parse()?;
    let regime: Regime = cli.regime.parse()?;
    let normalize: Normalization = cli.normalize.parse()?;
    let seeds = parse_seeds(&cli.seeds)?;

    let source = match &cli.data {
        Some(path) => match cli.format.as_str() {
            "csv" => DataSource::Csv {
                path: path.clone(),
                label_col: cli.label_col,
                has_header: cli.has_header,
            },
            "libsvm" => DataSource::Libsvm {
                path: path.clone(),
                n_override: cli.n_override,
            },
            other => bail!("unknown format {other:?}; expected csv or libsvm"),
        },
        None => {
            let (n, m, condition, noise) = parse_synth(&cli.synth)?;
            if loss == LossKind::Logistic {
                DataSource::SynthClass {
                    n,
                    m,
                    flip: noise,
                    seed: cli.synth_seed,
                }
            } else {
                DataSource::Synth {
                    n,
                    m,
                    condition,
                    noise,
                    seed: cli.synth_seed,
                }
            }
        }
    };

    // horizon 0 = one pass over the data
    let horizon = if cli.horizon == 0 {
        source.load(loss)?.m()
    } else {
        cli.horizon
    };

    Ok(ExperimentSpec {
        algos,
        seeds,
        regime,
        loss,
        horizon,
        mu: cli.mu,
        b: cli.b,
        alpha: cli.alpha,
        eta_c: cli.eta_c,
        emit_every: cli.emit_every,
        lazy_rep: cli.lazy_rep,
        diagnostics: cli.diagnostics,
        normalize,
        source,
        out_dir: cli.out.clone(),
        jobs: cli.jobs,
        prefix_comparator: cli.prefix_comparator,
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let spec = build_spec(&cli)?;
    let output = run_experiment(&spec).context("experiment failed")?;
    for line in &output.report_lines {
        println!("{line}");
    }
    println!(
        "wrote {} trace file(s), {} summary file(s) and {} under {}",
        output.artifacts.len(),
        output.summary_paths.len(),
        output.plot_path.file_name().unwrap().to_string_lossy(),
        spec.out_dir.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("1,2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds("7,10..12").unwrap(), vec![7, 10, 11]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("5..5").is_err());
    }

    #[test]
    fn synth_spec_parses() {
        let (n, m, c, s) = parse_synth("7,4000,10,0.1").unwrap();
        assert_eq!((n, m), (7, 4000));
        assert_eq!(c, 10.0);
        assert_eq!(s, 0.1);
        assert!(parse_synth("7,4000").is_err());
    }
}
