//! Multi-run experiment harness: runs an algorithm list across a seed
//! list against one dataset, writes per-run trace files, per-algorithm
//! seed-averaged summaries, and one plot-ready file.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{AlgorithmId, LossKind, Normalization, Regime, RunConfig};
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::losses::LossModel;
use crate::metrics::{
    classify_stats, comparator, full_dataset_comparator, per_round_losses,
    prefix_comparator_values, ClassifierStats, ComparatorResult, RegretLedger,
};
use crate::runner::{run_with_reference, RunTrace};
use crate::steppers::{protocol_of, Protocol};
use crate::trace::{append_context, TraceDocument};

/// Where the experiment's data comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Synth {
        n: usize,
        m: usize,
        condition: f64,
        noise: f64,
        seed: u64,
    },
    SynthClass {
        n: usize,
        m: usize,
        flip: f64,
        seed: u64,
    },
    Csv {
        path: PathBuf,
        label_col: Option<usize>,
        has_header: bool,
    },
    Libsvm {
        path: PathBuf,
        n_override: Option<usize>,
    },
}

impl DataSource {
    pub fn load(&self, loss: LossKind) -> Result<Dataset> {
        let mut ds = match self {
            DataSource::Synth {
                n,
                m,
                condition,
                noise,
                seed,
            } => {
                let (ds, _) = data::synth_quadratic(*n, *m, *condition, *noise, *seed)?;
                if loss == LossKind::Logistic {
                    // regression targets become margin signs
                    let mut ds = ds;
                    for label in &mut ds.labels {
                        *label = if *label >= 0.0 { 1.0 } else { -1.0 };
                    }
                    ds
                } else {
                    ds
                }
            }
            DataSource::SynthClass { n, m, flip, seed } => {
                let (ds, _) = data::synth_classification(*n, *m, *flip, *seed)?;
                ds
            }
            DataSource::Csv {
                path,
                label_col,
                has_header,
            } => {
                let probe = peek_columns(path)?;
                let label = label_col.unwrap_or(probe - 1);
                data::load_csv(path, label, *has_header)?
            }
            DataSource::Libsvm { path, n_override } => data::load_libsvm(path, *n_override)?,
        };
        if loss == LossKind::Logistic {
            ds.coerce_binary_labels()?;
        }
        Ok(ds)
    }

    /// Rebuilds a source from a dataset provenance string.
    pub fn from_provenance(s: &str) -> Result<DataSource> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("unparseable provenance {s:?}")))?;
        let fields = |rest: &str| -> Result<std::collections::BTreeMap<String, String>> {
            rest.split(',')
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| Error::config(format!("bad provenance field {kv:?}")))
                })
                .collect()
        };
        match kind {
            "synth" => {
                let f = fields(rest)?;
                let get = |k: &str| -> Result<&String> {
                    f.get(k)
                        .ok_or_else(|| Error::config(format!("provenance missing {k:?}")))
                };
                Ok(DataSource::Synth {
                    n: get("n")?.parse().map_err(|_| Error::config("bad n"))?,
                    m: get("m")?.parse().map_err(|_| Error::config("bad m"))?,
                    condition: get("cond")?
                        .parse()
                        .map_err(|_| Error::config("bad cond"))?,
                    noise: get("noise")?
                        .parse()
                        .map_err(|_| Error::config("bad noise"))?,
                    seed: get("seed")?
                        .parse()
                        .map_err(|_| Error::config("bad seed"))?,
                })
            }
            "synth-class" => {
                let f = fields(rest)?;
                let get = |k: &str| -> Result<&String> {
                    f.get(k)
                        .ok_or_else(|| Error::config(format!("provenance missing {k:?}")))
                };
                Ok(DataSource::SynthClass {
                    n: get("n")?.parse().map_err(|_| Error::config("bad n"))?,
                    m: get("m")?.parse().map_err(|_| Error::config("bad m"))?,
                    flip: get("flip")?
                        .parse()
                        .map_err(|_| Error::config("bad flip"))?,
                    seed: get("seed")?
                        .parse()
                        .map_err(|_| Error::config("bad seed"))?,
                })
            }
            "csv" => {
                let (path, query) = rest.split_once('?').unwrap_or((rest, ""));
                let mut label_col = None;
                let mut has_header = false;
                for kv in query.split('&').filter(|s| !s.is_empty()) {
                    match kv.split_once('=') {
                        Some(("label_col", v)) => {
                            label_col = Some(
                                v.parse()
                                    .map_err(|_| Error::config("bad label_col in provenance"))?,
                            );
                        }
                        Some(("header", v)) => has_header = v == "true",
                        _ => return Err(Error::config(format!("bad provenance field {kv:?}"))),
                    }
                }
                Ok(DataSource::Csv {
                    path: PathBuf::from(path),
                    label_col,
                    has_header,
                })
            }
            "libsvm" => {
                let (path, query) = rest.split_once('?').unwrap_or((rest, ""));
                let mut n_override = None;
                for kv in query.split('&').filter(|s| !s.is_empty()) {
                    match kv.split_once('=') {
                        Some(("n", v)) => {
                            n_override = Some(
                                v.parse()
                                    .map_err(|_| Error::config("bad n in provenance"))?,
                            );
                        }
                        _ => return Err(Error::config(format!("bad provenance field {kv:?}"))),
                    }
                }
                Ok(DataSource::Libsvm {
                    path: PathBuf::from(path),
                    n_override,
                })
            }
            other => Err(Error::config(format!("unknown provenance kind {other:?}"))),
        }
    }
}

fn peek_columns(path: &Path) -> Result<usize> {
    use std::io::BufRead;
    let path_str = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&path_str, e))?;
    let mut line = String::new();
    std::io::BufReader::new(file)
        .read_line(&mut line)
        .map_err(|e| Error::io(&path_str, e))?;
    let count = line.trim().split(',').count();
    if count == 0 || line.trim().is_empty() {
        return Err(Error::data(format!("{path_str} is empty")));
    }
    Ok(count)
}

/// A full experiment: configuration shared across runs plus the algorithm
/// and seed grids.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub algos: Vec<AlgorithmId>,
    pub seeds: Vec<u64>,
    pub regime: Regime,
    pub loss: LossKind,
    pub horizon: usize,
    pub mu: f64,
    pub b: f64,
    pub alpha: f64,
    pub eta_c: f64,
    pub emit_every: usize,
    pub lazy_rep: bool,
    pub diagnostics: bool,
    pub normalize: Normalization,
    pub source: DataSource,
    pub out_dir: PathBuf,
    /// Worker pool size; 0 means available parallelism.
    pub jobs: usize,
    pub prefix_comparator: bool,
}

impl ExperimentSpec {
    pub fn run_config(&self, algo: AlgorithmId, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(algo, self.regime, self.horizon, seed);
        cfg.loss = self.loss;
        cfg.mu = self.mu;
        cfg.b = self.b;
        cfg.alpha = self.alpha;
        cfg.eta_c = self.eta_c;
        cfg.emit_every = self.emit_every;
        cfg.lazy_rep = self.lazy_rep;
        cfg.diagnostics = self.diagnostics;
        cfg
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("experiment needs at least one seed"));
        }
        if self.algos.is_empty() {
            return Err(Error::config("experiment needs at least one algorithm"));
        }
        if self.horizon == 0 {
            // single runs support T=0; an experiment needs rounds for the
            // comparator and summaries
            return Err(Error::config("experiment horizon must be >= 1"));
        }
        Ok(())
    }
}

/// One run's post-processed results.
pub struct RunArtifacts {
    pub algo: AlgorithmId,
    pub seed: u64,
    pub trace_path: PathBuf,
    /// `(t, metric)` on the emit grid: regret for online runs,
    /// suboptimality for stochastic runs.
    pub metric_rows: Vec<(usize, f64)>,
    pub final_metric: f64,
    pub classifier: Option<ClassifierStats>,
    pub trace: RunTrace,
}

pub struct ExperimentOutput {
    pub artifacts: Vec<RunArtifacts>,
    pub summary_paths: Vec<PathBuf>,
    pub plot_path: PathBuf,
    /// Human-readable per-algorithm result lines.
    pub report_lines: Vec<String>,
}

struct SharedComparators {
    online: Option<(ComparatorResult, Vec<f64>, Vec<usize>)>,
    stochastic: Option<(ComparatorResult, f64)>,
}

fn emit_grid(horizon: usize, cadence: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (1..=horizon).filter(|t| t % cadence == 0).collect();
    if grid.last() != Some(&horizon) && horizon > 0 {
        grid.push(horizon);
    }
    grid
}

/// Runs every (algorithm, seed) pair and writes all output files.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| Error::io(spec.out_dir.display().to_string(), e))?;
    let dataset = spec.source.load(spec.loss)?;
    let dataset = data::normalize(&dataset, spec.normalize);
    let loss = LossModel::new(spec.loss, effective_mu(spec), &dataset)?;

    let shared = prepare_comparators(spec, &loss)?;

    let mut jobs = Vec::new();
    for &algo in &spec.algos {
        for &seed in &spec.seeds {
            jobs.push((algo, seed));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    let artifacts: Result<Vec<RunArtifacts>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(algo, seed)| run_one(spec, algo, seed, &dataset, &loss, &shared))
            .collect()
    });
    let artifacts = artifacts?;

    let (summary_paths, plot_path, report_lines) = write_aggregates(spec, &artifacts)?;
    Ok(ExperimentOutput {
        artifacts,
        summary_paths,
        plot_path,
        report_lines,
    })
}

fn effective_mu(spec: &ExperimentSpec) -> f64 {
    match spec.regime {
        Regime::General => 0.0,
        Regime::Strong => spec.mu,
    }
}

fn prepare_comparators(spec: &ExperimentSpec, loss: &LossModel) -> Result<SharedComparators> {
    let needs_online = spec
        .algos
        .iter()
        .any(|&a| protocol_of(a) == Protocol::Online);
    let needs_stochastic = spec
        .algos
        .iter()
        .any(|&a| protocol_of(a) == Protocol::Stochastic);
    let m = loss.samples();
    let online = if needs_online {
        let rounds: Vec<usize> = (0..spec.horizon).map(|i| i % m).collect();
        let result = comparator(loss, &rounds)?;
        let comp_losses = per_round_losses(loss, &rounds, &result.y_star);
        Some((result, comp_losses, rounds))
    } else {
        None
    };
    let stochastic = if needs_stochastic {
        let (result, f_star) = full_dataset_comparator(loss)?;
        Some((result, f_star))
    } else {
        None
    };
    Ok(SharedComparators { online, stochastic })
}

fn run_one(
    spec: &ExperimentSpec,
    algo: AlgorithmId,
    seed: u64,
    dataset: &Dataset,
    loss: &LossModel,
    shared: &SharedComparators,
) -> Result<RunArtifacts> {
    let cfg = spec.run_config(algo, seed);
    let protocol = protocol_of(algo);
    let reference: Option<&[f64]> = match protocol {
        Protocol::Online => shared.online.as_ref().map(|(c, _, _)| c.y_star.as_slice()),
        Protocol::Stochastic => shared.stochastic.as_ref().map(|(c, _)| c.y_star.as_slice()),
    };
    let trace = run_with_reference(&cfg, dataset, reference)?;

    let grid = emit_grid(spec.horizon, cfg.cadence());
    let (metric_rows, final_metric, ledger, subopt_rows, classifier, comp) = match protocol {
        Protocol::Online => {
            let (comp, comp_losses, _) = shared
                .online
                .as_ref()
                .expect("online comparator prepared for online algorithms");
            let ledger =
                RegretLedger::build(&trace.charged_losses(), &trace.strict_losses(), comp_losses);
            let rows: Vec<(usize, f64)> = grid.iter().map(|&t| (t, ledger.curve[t - 1])).collect();
            let final_metric = ledger.regret;
            let classifier = (spec.loss == LossKind::Logistic).then(|| {
                let margins: Vec<f64> = trace.steps.iter().map(|r| r.margin_pre).collect();
                let labels: Vec<f64> = trace.steps.iter().map(|r| loss.label(r.sample)).collect();
                classify_stats(&margins, &labels)
            });
            (
                rows,
                final_metric,
                Some(ledger),
                None,
                classifier,
                Some(comp),
            )
        }
        Protocol::Stochastic => {
            let (comp, f_star) = shared
                .stochastic
                .as_ref()
                .expect("full-dataset comparator prepared for stochastic algorithms");
            let rows: Vec<(usize, f64)> = trace
                .objective_rows
                .iter()
                .filter(|(count, _)| *count > 0)
                .map(|&(count, obj)| (count, obj - f_star))
                .collect();
            let final_metric = rows.last().map(|r| r.1).unwrap_or(0.0);
            (
                rows.clone(),
                final_metric,
                None,
                Some(rows),
                None,
                Some(comp),
            )
        }
    };

    let doc = TraceDocument {
        trace: &trace,
        ledger: ledger.as_ref(),
        suboptimality_rows: subopt_rows.as_deref(),
        comparator: comp,
        classifier,
    };
    let rendered = append_context(&doc.render(), &dataset.provenance, dataset.normalization);
    let trace_path = spec
        .out_dir
        .join(format!("{}-seed{}.trace.csv", algo.name(), seed));
    std::fs::write(&trace_path, rendered)
        .map_err(|e| Error::io(trace_path.display().to_string(), e))?;

    if spec.prefix_comparator && protocol == Protocol::Online {
        let (_, _, rounds) = shared.online.as_ref().unwrap();
        write_prefix_file(spec, algo, seed, loss, rounds, &trace)?;
    }

    Ok(RunArtifacts {
        algo,
        seed,
        trace_path,
        metric_rows,
        final_metric,
        classifier,
        trace,
    })
}

/// Auxiliary per-prefix-comparator regret on a coarse grid.
fn write_prefix_file(
    spec: &ExperimentSpec,
    algo: AlgorithmId,
    seed: u64,
    loss: &LossModel,
    rounds: &[usize],
    trace: &RunTrace,
) -> Result<()> {
    let horizon = spec.horizon;
    let mut prefixes: Vec<usize> = Vec::new();
    let points = 32usize;
    for i in 1..=points {
        let p = ((horizon as f64) * i as f64 / points as f64).round() as usize;
        if p >= 1 && prefixes.last() != Some(&p) {
            prefixes.push(p);
        }
    }
    let values = prefix_comparator_values(loss, rounds, &prefixes)?;
    let mut cum = 0.0;
    let mut row_iter = trace.steps.iter();
    let mut out = String::from("# columns=t,prefix_comparator_value,prefix_regret\n");
    let mut consumed = 0usize;
    for (p, comp_val) in values {
        while consumed < p {
            cum += row_iter.next().expect("trace covers horizon").charged_loss;
            consumed += 1;
        }
        out.push_str(&format!("{p},{},{}\n", fmt(comp_val), fmt(cum - comp_val)));
    }
    let path = spec
        .out_dir
        .join(format!("{}-seed{}.prefix.csv", algo.name(), seed));
    std::fs::write(&path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Per-algorithm summary rows: (t, mean, stdev).
type SummaryRows = Vec<(usize, f64, f64)>;

fn write_aggregates(
    spec: &ExperimentSpec,
    artifacts: &[RunArtifacts],
) -> Result<(Vec<PathBuf>, PathBuf, Vec<String>)> {
    let mut summary_paths = Vec::new();
    let mut report_lines = Vec::new();
    // per-algorithm summaries on the shared grid
    let mut per_algo: Vec<(AlgorithmId, SummaryRows)> = Vec::new();
    for &algo in &spec.algos {
        let runs: Vec<&RunArtifacts> = artifacts.iter().filter(|a| a.algo == algo).collect();
        let grid: Vec<usize> = runs[0].metric_rows.iter().map(|r| r.0).collect();
        let mut rows = Vec::with_capacity(grid.len());
        for (i, &t) in grid.iter().enumerate() {
            let values: Vec<f64> = runs.iter().map(|r| r.metric_rows[i].1).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            rows.push((t, mean, var.sqrt()));
        }
        let path = spec.out_dir.join(format!("{}-summary.csv", algo.name()));
        let mut content = String::from("# columns=t,mean,stdev\n");
        for &(t, mean, std) in &rows {
            content.push_str(&format!("{t},{},{}\n", fmt(mean), fmt(std)));
        }
        std::fs::write(&path, content).map_err(|e| Error::io(path.display().to_string(), e))?;
        summary_paths.push(path);

        let finals: Vec<f64> = runs.iter().map(|r| r.final_metric).collect();
        let mean_final = finals.iter().sum::<f64>() / finals.len() as f64;
        let metric_name = match protocol_of(algo) {
            Protocol::Online => "regret",
            Protocol::Stochastic => "suboptimality",
        };
        let mut line = format!(
            "{}: final {metric_name} mean {:.6e} over {} seed(s)",
            algo.name(),
            mean_final,
            finals.len()
        );
        if let Some(stats) = runs.iter().find_map(|r| r.classifier) {
            line.push_str(&format!(
                "; accuracy {:.2}% ({} mistakes)",
                stats.accuracy * 100.0,
                stats.mistakes
            ));
        }
        report_lines.push(line);
        per_algo.push((algo, rows));
    }

    // plot file: shared grid column + (mean, stdev) pair per algorithm
    let grid: Vec<usize> = per_algo
        .first()
        .map(|(_, rows)| rows.iter().map(|r| r.0).collect())
        .unwrap_or_default();
    let shared_grid: Vec<usize> = grid
        .into_iter()
        .filter(|t| {
            per_algo
                .iter()
                .all(|(_, rows)| rows.iter().any(|r| r.0 == *t))
        })
        .collect();
    let mut header = String::from("t");
    for (algo, _) in &per_algo {
        header.push_str(&format!(",{0}_mean,{0}_stdev", algo.name()));
    }
    let mut content = format!("# columns={header}\n");
    for &t in &shared_grid {
        let mut line = t.to_string();
        for (_, rows) in &per_algo {
            let &(_, mean, std) = rows.iter().find(|r| r.0 == t).expect("shared grid");
            line.push_str(&format!(",{},{}", fmt(mean), fmt(std)));
        }
        line.push('\n');
        content.push_str(&line);
    }
    let plot_path = spec.out_dir.join("plot.csv");
    std::fs::write(&plot_path, content)
        .map_err(|e| Error::io(plot_path.display().to_string(), e))?;
    Ok((summary_paths, plot_path, report_lines))
}
