//! Dataset ingestion: dense CSV, sparse LIBSVM, normalization, and
//! synthetic problem generators.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Normalization;
use crate::error::{Error, Result};

/// One feature vector, dense or as a sorted sparse index–value list.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Dense(Vec<f64>),
    Sparse(Vec<(usize, f64)>),
}

impl Row {
    pub fn dot(&self, y: &[f64]) -> f64 {
        match self {
            Row::Dense(a) => a.iter().zip(y).map(|(ai, yi)| ai * yi).sum(),
            Row::Sparse(pairs) => pairs.iter().map(|&(i, v)| v * y[i]).sum(),
        }
    }

    pub fn get(&self, k: usize) -> f64 {
        match self {
            Row::Dense(a) => a[k],
            Row::Sparse(pairs) => pairs
                .binary_search_by_key(&k, |&(i, _)| i)
                .map(|pos| pairs[pos].1)
                .unwrap_or(0.0),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Row::Dense(a) => a.len(),
            Row::Sparse(pairs) => pairs.len(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match self {
            Row::Dense(a) => a.iter().map(|v| v * v).sum(),
            Row::Sparse(pairs) => pairs.iter().map(|&(_, v)| v * v).sum(),
        }
    }

    /// Adds `scale * row` into `out`.
    pub fn add_scaled_into(&self, scale: f64, out: &mut [f64]) {
        match self {
            Row::Dense(a) => {
                for (o, ai) in out.iter_mut().zip(a) {
                    *o += scale * ai;
                }
            }
            Row::Sparse(pairs) => {
                for &(i, v) in pairs {
                    out[i] += scale * v;
                }
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        match self {
            Row::Dense(a) => a.iter_mut().for_each(|v| *v *= factor),
            Row::Sparse(pairs) => pairs.iter_mut().for_each(|(_, v)| *v *= factor),
        }
    }

    fn to_dense(&self, n: usize) -> Vec<f64> {
        match self {
            Row::Dense(a) => a.clone(),
            Row::Sparse(pairs) => {
                let mut out = vec![0.0; n];
                for &(i, v) in pairs {
                    out[i] = v;
                }
                out
            }
        }
    }
}

/// Feature rows with labels plus normalization metadata.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<Row>,
    pub labels: Vec<f64>,
    pub n: usize,
    pub normalization: Normalization,
    pub provenance: String,
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::data("dataset has no rows"));
        }
        if self.rows.len() != self.labels.len() {
            return Err(Error::data(format!(
                "{} rows but {} labels",
                self.rows.len(),
                self.labels.len()
            )));
        }
        for (idx, row) in self.rows.iter().enumerate() {
            match row {
                Row::Dense(a) if a.len() != self.n => {
                    return Err(Error::data(format!(
                        "row {idx} has {} features, expected {}",
                        a.len(),
                        self.n
                    )));
                }
                Row::Sparse(pairs) => {
                    if let Some(&(i, _)) = pairs.iter().find(|&&(i, _)| i >= self.n) {
                        return Err(Error::data(format!(
                            "row {idx} has feature index {i} >= n = {}",
                            self.n
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Remaps {0,1} labels to {-1,+1}; labels already in {-1,+1} pass
    /// through, anything else is rejected.
    pub fn coerce_binary_labels(&mut self) -> Result<()> {
        for (i, label) in self.labels.iter_mut().enumerate() {
            if *label == 0.0 {
                *label = -1.0;
            } else if *label != 1.0 && *label != -1.0 {
                return Err(Error::data(format!(
                    "label {label} at row {i} is not binary ({{0,1}} or {{-1,+1}})"
                )));
            }
        }
        Ok(())
    }
}

fn parse_cell(path: &str, cell: &str, line_no: usize, col_no: usize) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_string(),
        location: format!("row {line_no}, column {col_no}"),
        message: format!("cell {:?} is not numeric", cell.trim()),
    })
}

/// Loads a dense numeric CSV. `label_column` is the 0-based column holding
/// the label; every other column becomes a feature. Row/column coordinates
/// in errors are 1-based physical positions.
pub fn load_csv(path: impl AsRef<Path>, label_column: usize, has_header: bool) -> Result<Dataset> {
    let path_str = path.as_ref().display().to_string();
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let reader = BufReader::new(file);

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        if idx == 0 && has_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        match width {
            None => {
                if label_column >= cells.len() {
                    return Err(Error::config(format!(
                        "label column {label_column} out of range for {} columns",
                        cells.len()
                    )));
                }
                width = Some(cells.len());
            }
            Some(w) if w != cells.len() => {
                return Err(Error::Parse {
                    path: path_str,
                    location: format!("row {line_no}"),
                    message: format!("ragged row: {} cells, expected {w}", cells.len()),
                });
            }
            _ => {}
        }
        let mut features = Vec::with_capacity(cells.len() - 1);
        let mut label = 0.0;
        for (col, cell) in cells.iter().enumerate() {
            let value = parse_cell(&path_str, cell, line_no, col + 1)?;
            if col == label_column {
                label = value;
            } else {
                features.push(value);
            }
        }
        rows.push(Row::Dense(features));
        labels.push(label);
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            path: path_str,
            location: "end of file".to_string(),
            message: "no data rows".to_string(),
        });
    }
    let n = match &rows[0] {
        Row::Dense(a) => a.len(),
        _ => unreachable!(),
    };
    let ds = Dataset {
        rows,
        labels,
        n,
        normalization: Normalization::None,
        provenance: format!("csv:{path_str}?label_col={label_column}&header={has_header}"),
    };
    ds.validate()?;
    Ok(ds)
}

/// Loads a sparse LIBSVM-style file: `label (idx:val )+` per line, 1-based
/// indices, `#` starts a comment. `n_override` fixes the feature count;
/// otherwise n is the maximum index seen.
pub fn load_libsvm(path: impl AsRef<Path>, n_override: Option<usize>) -> Result<Dataset> {
    let path_str = path.as_ref().display().to_string();
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let reader = BufReader::new(file);

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize; // 1-based

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let label_tok = parts.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            path: path_str.clone(),
            location: format!("line {line_no}"),
            message: format!("label {label_tok:?} is not numeric"),
        })?;
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        for tok in parts {
            let mut halves = tok.split(':');
            let (i_tok, v_tok) = match (halves.next(), halves.next(), halves.next()) {
                (Some(i), Some(v), None) => (i, v),
                _ => {
                    return Err(Error::Parse {
                        path: path_str,
                        location: format!("line {line_no}"),
                        message: format!("malformed index:value pair {tok:?}"),
                    });
                }
            };
            let index: usize = i_tok.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                location: format!("line {line_no}"),
                message: format!("index {i_tok:?} is not an integer"),
            })?;
            if index == 0 {
                return Err(Error::Parse {
                    path: path_str,
                    location: format!("line {line_no}"),
                    message: "feature indices are 1-based; found 0".to_string(),
                });
            }
            let value: f64 = v_tok.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                location: format!("line {line_no}"),
                message: format!("value {v_tok:?} is not numeric"),
            })?;
            max_index = max_index.max(index);
            pairs.push((index - 1, value));
        }
        pairs.sort_by_key(|&(i, _)| i);
        rows.push(Row::Sparse(pairs));
        labels.push(label);
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            path: path_str,
            location: "end of file".to_string(),
            message: "no data rows".to_string(),
        });
    }
    let n = match n_override {
        Some(n) if n >= max_index => n,
        Some(n) => {
            return Err(Error::config(format!(
                "n override {n} is smaller than max feature index {max_index}"
            )));
        }
        None => max_index.max(1),
    };
    let ds = Dataset {
        rows,
        labels,
        n,
        normalization: Normalization::None,
        provenance: format!("libsvm:{path_str}?n={n}"),
    };
    ds.validate()?;
    Ok(ds)
}

/// Applies a normalization mode, returning a new dataset.
///
/// `UnitRowNorm` divides each nonzero row by its l2 norm (zero rows are
/// kept unchanged). `MinMax` maps each feature to the unit interval by its
/// range, treating absent sparse entries as zeros; zero-range features map
/// to 0. MinMax densifies sparse rows when the shift moves implicit zeros
/// off zero.
pub fn normalize(ds: &Dataset, mode: Normalization) -> Dataset {
    let mut out = ds.clone();
    out.normalization = mode;
    match mode {
        Normalization::None => {}
        Normalization::UnitRowNorm => {
            for row in &mut out.rows {
                let norm = row.norm_sq().sqrt();
                if norm > 0.0 {
                    row.scale(1.0 / norm);
                }
            }
        }
        Normalization::MinMax => {
            let n = ds.n;
            let m = ds.m();
            let mut min = vec![f64::INFINITY; n];
            let mut max = vec![f64::NEG_INFINITY; n];
            let mut explicit = vec![0usize; n];
            for row in &ds.rows {
                match row {
                    Row::Dense(a) => {
                        for (j, &v) in a.iter().enumerate() {
                            min[j] = min[j].min(v);
                            max[j] = max[j].max(v);
                            explicit[j] += 1;
                        }
                    }
                    Row::Sparse(pairs) => {
                        for &(j, v) in pairs {
                            min[j] = min[j].min(v);
                            max[j] = max[j].max(v);
                            explicit[j] += 1;
                        }
                    }
                }
            }
            for j in 0..n {
                if explicit[j] < m {
                    // implicit zeros participate in the range
                    min[j] = min[j].min(0.0);
                    max[j] = max[j].max(0.0);
                }
                if explicit[j] == 0 {
                    min[j] = 0.0;
                    max[j] = 0.0;
                }
            }
            let map = |j: usize, v: f64| -> f64 {
                let range = max[j] - min[j];
                if range == 0.0 {
                    0.0
                } else {
                    (v - min[j]) / range
                }
            };
            // zeros stay zero iff min == 0 (or the column is constant)
            let zeros_stay = (0..n).all(|j| {
                let range = max[j] - min[j];
                range == 0.0 || min[j] == 0.0
            });
            for row in &mut out.rows {
                match row {
                    Row::Dense(a) => {
                        for (j, v) in a.iter_mut().enumerate() {
                            *v = map(j, *v);
                        }
                    }
                    Row::Sparse(pairs) if zeros_stay => {
                        for (j, v) in pairs.iter_mut() {
                            *v = map(*j, *v);
                        }
                    }
                    Row::Sparse(pairs) => {
                        let mut dense = vec![0.0; n];
                        for &(j, v) in pairs.iter() {
                            dense[j] = v;
                        }
                        for (j, v) in dense.iter_mut().enumerate() {
                            *v = map(j, *v);
                        }
                        *row = Row::Dense(dense);
                    }
                }
            }
        }
    }
    out
}

/// Synthetic regression problem with a planted parameter vector.
///
/// Rows form a matrix with prescribed spectral condition number; targets
/// are `A y_planted + noise` with `noise ~ N(0, noise_sd^2)`. With `m == n`
/// and `condition = 1` the rows are orthonormal.
pub fn synth_quadratic(
    n: usize,
    m: usize,
    condition: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    if n == 0 || m == 0 {
        return Err(Error::config("synthetic problem needs n >= 1 and m >= 1"));
    }
    if m < n {
        return Err(Error::config("synthetic generator requires m >= n"));
    }
    if condition < 1.0 || !condition.is_finite() {
        return Err(Error::config("condition number must be >= 1"));
    }
    if noise_sd < 0.0 {
        return Err(Error::config("noise standard deviation must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crate::sampler::data_rng(seed).random());
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    // A = U S V^T with orthonormal U (m x n), orthogonal V (n x n) and
    // log-spaced singular values in [1/condition, 1].
    let gauss_u = DMatrix::from_fn(m, n, |_, _| normal.sample(&mut rng));
    let u = gauss_u.qr().q();
    let gauss_v = DMatrix::from_fn(n, n, |_, _| normal.sample(&mut rng));
    let v = gauss_v.qr().q();
    let singular: Vec<f64> = (0..n)
        .map(|j| {
            if n == 1 {
                1.0
            } else {
                let frac = j as f64 / (n - 1) as f64;
                (-frac * condition.ln()).exp()
            }
        })
        .collect();
    let mut scaled_v = v.transpose();
    for (j, s) in singular.iter().enumerate() {
        scaled_v.row_mut(j).scale_mut(*s);
    }
    let a = u * scaled_v;

    let planted: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let row: Vec<f64> = (0..n).map(|j| a[(i, j)]).collect();
        let mut target: f64 = row.iter().zip(&planted).map(|(r, p)| r * p).sum();
        if noise_sd > 0.0 {
            target += noise_sd * normal.sample(&mut rng);
        }
        rows.push(Row::Dense(row));
        labels.push(target);
    }
    let ds = Dataset {
        rows,
        labels,
        n,
        normalization: Normalization::None,
        provenance: format!("synth:n={n},m={m},cond={condition},noise={noise_sd},seed={seed}"),
    };
    Ok((ds, planted))
}

/// Synthetic binary classification: labels are the sign of the planted
/// margin, with rows resampled until the margin clears a floor so the
/// classes are separated, then flipped with probability `flip_prob`.
pub fn synth_classification(
    n: usize,
    m: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    if n == 0 || m == 0 {
        return Err(Error::config("synthetic problem needs n >= 1 and m >= 1"));
    }
    if !(0.0..=0.5).contains(&flip_prob) {
        return Err(Error::config("flip probability must lie in [0, 0.5]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crate::sampler::data_rng(seed ^ 0x5e17).random());
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let planted: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let planted_norm = planted.iter().map(|v| v * v).sum::<f64>().sqrt();
    let margin_floor = 0.15;

    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    while rows.len() < m {
        let mut row: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        row.iter_mut().for_each(|v| *v /= norm);
        let margin: f64 = row.iter().zip(&planted).map(|(r, p)| r * p).sum::<f64>() / planted_norm;
        if margin.abs() < margin_floor {
            continue;
        }
        let mut label = if margin >= 0.0 { 1.0 } else { -1.0 };
        if flip_prob > 0.0 && rng.random::<f64>() < flip_prob {
            label = -label;
        }
        rows.push(Row::Dense(row));
        labels.push(label);
    }
    let ds = Dataset {
        rows,
        labels,
        n,
        normalization: Normalization::UnitRowNorm,
        provenance: format!("synth-class:n={n},m={m},flip={flip_prob},seed={seed}"),
    };
    Ok((ds, planted))
}

fn format_float(v: f64) -> String {
    // shortest representation that parses back to the same bits
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

/// Writes a dataset as dense CSV with the label in the last column.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut file = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        let dense = row.to_dense(ds.n);
        let mut line = String::new();
        for v in dense {
            line.push_str(&format_float(v));
            line.push(',');
        }
        line.push_str(&format_float(*label));
        line.push('\n');
        file.write_all(line.as_bytes())
            .map_err(|e| Error::io(&path_str, e))?;
    }
    Ok(())
}

/// Writes a dataset in LIBSVM format (1-based indices).
pub fn save_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let mut file = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        let mut line = format_float(*label);
        match row {
            Row::Dense(a) => {
                for (j, &v) in a.iter().enumerate() {
                    if v != 0.0 {
                        line.push(' ');
                        line.push_str(&format!("{}:{}", j + 1, format_float(v)));
                    }
                }
            }
            Row::Sparse(pairs) => {
                for &(j, v) in pairs {
                    line.push(' ');
                    line.push_str(&format!("{}:{}", j + 1, format_float(v)));
                }
            }
        }
        line.push('\n');
        file.write_all(line.as_bytes())
            .map_err(|e| Error::io(&path_str, e))?;
    }
    Ok(())
}
