//! Trace files: CSV bodies under a `#`-prefixed metadata block.
//!
//! The metadata echoes the full configuration and data provenance, so a
//! trace file alone is enough to reconstruct and re-run its experiment.
//! Timing lives in a dedicated trailing column (and the timestamp in the
//! metadata); [`deterministic_body`] strips both, and what remains is
//! byte-identical across re-runs of the same configuration and seed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::config::{Normalization, RunConfig};
use crate::error::{Error, Result};
use crate::metrics::{ClassifierStats, ComparatorResult, RegretLedger};
use crate::runner::RunTrace;
use crate::steppers::Protocol;

pub const TRACE_FORMAT: &str = "arcd-trace-v1";

/// Everything the writer needs beyond the raw run.
pub struct TraceDocument<'a> {
    pub trace: &'a RunTrace,
    pub ledger: Option<&'a RegretLedger>,
    /// `(steps_completed, suboptimality)` rows for stochastic runs.
    pub suboptimality_rows: Option<&'a [(usize, f64)]>,
    pub comparator: Option<&'a ComparatorResult>,
    pub classifier: Option<ClassifierStats>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl<'a> TraceDocument<'a> {
    pub fn render(&self) -> String {
        let trace = self.trace;
        let cfg = &trace.config;
        let mut out = String::new();
        let mut meta = |k: &str, v: String| {
            out.push_str(&format!("# {k}={v}\n"));
        };
        meta("format", TRACE_FORMAT.to_string());
        meta(
            "timestamp_ns",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos().to_string())
                .unwrap_or_else(|_| "0".to_string()),
        );
        meta("version", env!("CARGO_PKG_VERSION").to_string());
        meta("algo", cfg.algo.name().to_string());
        meta(
            "protocol",
            match trace.protocol {
                Protocol::Stochastic => "stochastic".to_string(),
                Protocol::Online => "online".to_string(),
            },
        );
        meta("regime", cfg.regime.name().to_string());
        meta("loss", cfg.loss.name().to_string());
        meta("T", cfg.horizon.to_string());
        meta("seed", cfg.seed.to_string());
        meta("mu", fmt_f64(cfg.mu));
        meta("b", fmt_f64(cfg.b));
        meta("alpha", fmt_f64(cfg.alpha));
        meta("eta_c", fmt_f64(cfg.eta_c));
        meta("emit_every", cfg.emit_every.to_string());
        meta("lazy_rep", cfg.lazy_rep.to_string());
        meta("diagnostics", cfg.diagnostics.to_string());
        meta("L", fmt_f64(trace.l_used));
        meta("cyclic_wrapped", trace.cyclic_wrapped.to_string());
        if let Some(s) = trace.measured.sigma_hat {
            meta("sigma_hat", fmt_f64(s));
            meta(
                "suggested_b",
                fmt_f64(crate::diagnostics::suggest_b(
                    trace.measured.sigma_hat,
                    trace.measured.d_hat,
                    trace.final_iterate.len(),
                )),
            );
        }
        if let Some(d) = trace.measured.d_hat {
            meta("d_hat", fmt_f64(d));
        }
        if let Some(r) = trace.measured.r_hat {
            meta("r_hat", fmt_f64(r));
        }
        if let Some(g) = trace.measured.g_hat {
            meta("g_hat", fmt_f64(g));
        }
        if let Some(c) = self.comparator {
            meta("comparator_objective", fmt_f64(c.objective));
            meta("comparator_residual", fmt_f64(c.achieved_residual));
            meta("comparator_singular", c.singular_fallback.to_string());
        }
        if let Some(ledger) = self.ledger {
            meta("final_regret", fmt_f64(ledger.regret));
            meta("strict_final_regret", fmt_f64(ledger.strict_regret));
            meta("cumulative_loss", fmt_f64(ledger.cumulative_loss));
        }
        if let Some(rows) = self.suboptimality_rows {
            if let Some((_, last)) = rows.last() {
                meta("final_suboptimality", fmt_f64(*last));
            }
        }
        if let Some(stats) = self.classifier {
            meta("accuracy", fmt_f64(stats.accuracy));
            meta("mistakes", stats.mistakes.to_string());
        }

        // cumulative coordinate-write counts per step
        let coords_cum: Vec<u64> = {
            let mut acc = 0u64;
            trace
                .steps
                .iter()
                .map(|r| {
                    acc += (r.y_written + r.z_written) as u64;
                    acc
                })
                .collect()
        };
        let cadence = cfg.cadence();
        match trace.protocol {
            Protocol::Online => {
                out.push_str(
                    "# columns=t,charged_loss,strict_loss,cum_loss,regret,strict_regret,coords_cum,wall_ns\n",
                );
                let curve = self.ledger.map(|l| (&l.curve, &l.strict_curve));
                for (i, row) in trace.steps.iter().enumerate() {
                    let is_emit = row.step % cadence == 0 || row.step == cfg.horizon;
                    if !is_emit {
                        continue;
                    }
                    let (regret, strict_regret) = match curve {
                        Some((c, s)) => (fmt_f64(c[i]), fmt_f64(s[i])),
                        None => (String::new(), String::new()),
                    };
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        row.t,
                        fmt_f64(row.charged_loss),
                        fmt_f64(row.strict_loss),
                        fmt_f64(row.cumulative_loss),
                        regret,
                        strict_regret,
                        coords_cum[i],
                        row.wall_ns,
                    ));
                }
            }
            Protocol::Stochastic => {
                out.push_str("# columns=step,objective,suboptimality,coords_cum,wall_ns\n");
                let sub: BTreeMap<usize, f64> = self
                    .suboptimality_rows
                    .map(|rows| rows.iter().copied().collect())
                    .unwrap_or_default();
                for &(count, objective) in &trace.objective_rows {
                    let subopt = sub.get(&count).map(|v| fmt_f64(*v)).unwrap_or_default();
                    let (coords, wall) = if count == 0 {
                        (0, 0u128)
                    } else {
                        (coords_cum[count - 1], trace.steps[count - 1].wall_ns)
                    };
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        count,
                        fmt_f64(objective),
                        subopt,
                        coords,
                        wall,
                    ));
                }
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path_str = path.as_ref().display().to_string();
        let mut file = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
        file.write_all(self.render().as_bytes())
            .map_err(|e| Error::io(&path_str, e))
    }
}

/// Extra metadata lines appended by the experiment driver (data
/// provenance, normalization) so a file is self-contained.
pub fn append_context(rendered: &str, provenance: &str, normalize: Normalization) -> String {
    // context lines belong with the other metadata, before the body
    let mut meta = String::new();
    let mut body = String::new();
    for line in rendered.lines() {
        if line.starts_with('#') {
            meta.push_str(line);
            meta.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    format!(
        "{meta}# data={provenance}\n# normalize={}\n{body}",
        normalize.name()
    )
}

/// Parses the `# key=value` metadata block.
pub fn parse_metadata(content: &str) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for line in content.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            continue;
        };
        if let Some((k, v)) = rest.split_once('=') {
            map.insert(k.to_string(), v.to_string());
        }
    }
    map
}

/// Rebuilds the run configuration recorded in a trace file's metadata.
pub fn config_from_metadata(meta: &BTreeMap<String, String>) -> Result<RunConfig> {
    let get = |k: &str| -> Result<&String> {
        meta.get(k)
            .ok_or_else(|| Error::config(format!("trace metadata missing key {k:?}")))
    };
    let parse_f = |k: &str| -> Result<f64> {
        get(k)?
            .parse::<f64>()
            .map_err(|_| Error::config(format!("trace metadata key {k:?} is not numeric")))
    };
    let mut cfg = RunConfig::new(
        get("algo")?.parse()?,
        get("regime")?.parse()?,
        get("T")?
            .parse::<usize>()
            .map_err(|_| Error::config("trace metadata key \"T\" is not an integer"))?,
        get("seed")?
            .parse::<u64>()
            .map_err(|_| Error::config("trace metadata key \"seed\" is not an integer"))?,
    );
    cfg.loss = get("loss")?.parse()?;
    cfg.mu = parse_f("mu")?;
    cfg.b = parse_f("b")?;
    cfg.alpha = parse_f("alpha")?;
    cfg.eta_c = parse_f("eta_c")?;
    cfg.emit_every = get("emit_every")?
        .parse::<usize>()
        .map_err(|_| Error::config("trace metadata key \"emit_every\" is not an integer"))?;
    cfg.lazy_rep = get("lazy_rep")? == "true";
    cfg.diagnostics = get("diagnostics")? == "true";
    Ok(cfg)
}

/// The comparison form of a trace: body rows only, timing column removed.
pub fn deterministic_body(content: &str) -> String {
    let mut out = String::new();
    for line in content.lines() {
        if line.starts_with('#') {
            continue;
        }
        match line.rsplit_once(',') {
            Some((rest, _wall)) => {
                out.push_str(rest);
                out.push('\n');
            }
            None => {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}
