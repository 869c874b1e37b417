//! Time-series generation, ingestion, scaling, windowing and splitting.
//!
//! Everything downstream consumes a [`WindowedDataset`]: one-step-ahead
//! supervised pairs built from a [`TimeSeries`] with a fixed look back.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A multivariate series stored row-major (rows are timesteps).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    n_cols: usize,
    column_names: Vec<String>,
    target_columns: Vec<usize>,
    sample_rate: Option<f64>,
}

impl TimeSeries {
    /// Builds a series from row-major values. Every column is a target.
    pub fn new(values: Vec<f64>, column_names: Vec<String>) -> Result<Self> {
        let n_cols = column_names.len();
        if n_cols == 0 {
            return Err(Error::Size("a series needs at least one column".into()));
        }
        if !values.len().is_multiple_of(n_cols) {
            return Err(Error::Size(format!(
                "{} values do not fill rows of {} columns",
                values.len(),
                n_cols
            )));
        }
        let n_rows = values.len() / n_cols;
        if n_rows < 2 {
            return Err(Error::Size(format!(
                "a series needs at least 2 rows, got {n_rows}"
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / n_cols + 1,
                column: column_names[pos % n_cols].clone(),
                reason: "non-finite value".into(),
            });
        }
        Ok(Self {
            values,
            n_cols,
            target_columns: (0..n_cols).collect(),
            column_names,
            sample_rate: None,
        })
    }

    /// Single-column series named `name`.
    pub fn univariate(name: &str, values: Vec<f64>) -> Result<Self> {
        Self::new(values, vec![name.to_string()])
    }

    pub fn with_sample_rate(mut self, rate: f64) -> Self {
        self.sample_rate = Some(rate);
        self
    }

    /// Replaces the target columns, looked up by label.
    pub fn with_targets<S: AsRef<str>>(mut self, labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("targets", "at least one target column is required"));
        }
        let mut idx = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            let i = self
                .column_names
                .iter()
                .position(|c| c == label)
                .ok_or_else(|| Error::UnknownColumn(label.to_string()))?;
            idx.push(i);
        }
        self.target_columns = idx;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn target_columns(&self) -> &[usize] {
        &self.target_columns
    }

    pub fn sample_rate(&self) -> Option<f64> {
        self.sample_rate
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.values[i * self.n_cols + j]).collect()
    }

    /// Writes the series as a header + one row per timestep.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut out = std::io::BufWriter::new(file);
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        writeln!(out, "{}", self.column_names.join(",")).map_err(io)?;
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(",")).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Parameters of `y(t) = A sin(2 pi f t + phase)` sampled at `rate` Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineParams {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub rate: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for SineParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
            rate: 10.0,
            t_start: 0.0,
            t_end: 100.0,
        }
    }
}

impl SineParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.amplitude,
            self.frequency,
            self.phase,
            self.rate,
            self.t_start,
            self.t_end,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sine", "all parameters must be finite"));
        }
        if self.rate <= 0.0 {
            return Err(invalid("rate", format!("must be > 0, got {}", self.rate)));
        }
        if self.t_end <= self.t_start {
            return Err(invalid("t_end", "must be greater than t_start"));
        }
        Ok(())
    }

    /// Number of samples on the half-open interval `[t_start, t_end)`.
    pub fn n_samples(&self) -> usize {
        // Round before flooring so that e.g. 100 s at 10 Hz is 1000, not 999.
        let exact = (self.t_end - self.t_start) * self.rate;
        let nearest = exact.round();
        if (exact - nearest).abs() < 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            exact.floor() as usize
        }
    }
}

/// Samples a sine wave into a univariate series with column `y`.
pub fn generate_sine(p: &SineParams) -> Result<TimeSeries> {
    p.validate()?;
    let n = p.n_samples();
    let values = (0..n)
        .map(|k| {
            let t = p.t_start + k as f64 / p.rate;
            p.amplitude * (2.0 * PI * p.frequency * t + p.phase).sin()
        })
        .collect();
    Ok(TimeSeries::univariate("y", values)?.with_sample_rate(p.rate))
}

/// Reads a headed CSV file. An empty `targets` list is only accepted for
/// single-column files.
pub fn load_csv<S: AsRef<str>>(path: &Path, targets: &[S]) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut values = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: r + 1,
                column: header[c].clone(),
                reason: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: r + 1,
                    column: header[c].clone(),
                    reason: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
    }
    let ts = TimeSeries::new(values, header)?;
    if targets.is_empty() {
        if ts.n_cols() == 1 {
            Ok(ts)
        } else {
            Err(invalid(
                "targets",
                "multivariate data requires explicit target columns",
            ))
        }
    } else {
        ts.with_targets(targets)
    }
}

/// Per-column `(min, max)` pairs recorded by [`minmax_scale`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxTable {
    pub ranges: Vec<(f64, f64)>,
}

impl MinMaxTable {
    pub fn inverse(&self, ts: &TimeSeries) -> TimeSeries {
        let mut out = ts.clone();
        let n = ts.n_cols;
        for (i, v) in out.values.iter_mut().enumerate() {
            let (lo, hi) = self.ranges[i % n];
            *v = if hi > lo { lo + *v * (hi - lo) } else { lo };
        }
        out
    }
}

/// Maps each column to `[0, 1]`. Constant columns map to 0.
pub fn minmax_scale(ts: &TimeSeries) -> (TimeSeries, MinMaxTable) {
    let n = ts.n_cols;
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    for (i, &v) in ts.values.iter().enumerate() {
        let r = &mut ranges[i % n];
        r.0 = r.0.min(v);
        r.1 = r.1.max(v);
    }
    let mut out = ts.clone();
    for (i, v) in out.values.iter_mut().enumerate() {
        let (lo, hi) = ranges[i % n];
        *v = if hi > lo {
            ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }
    (out, MinMaxTable { ranges })
}

/// Supervised one-step-ahead pairs: `lb` rows of every column predict the
/// target columns of the next row.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    lb: usize,
    n_features: usize,
    n_outputs: usize,
}

impl WindowedDataset {
    pub fn from_parts(
        inputs: Vec<f64>,
        targets: Vec<f64>,
        lb: usize,
        n_features: usize,
        n_outputs: usize,
    ) -> Result<Self> {
        if lb == 0 || n_features == 0 || n_outputs == 0 {
            return Err(Error::Size("window dimensions must be positive".into()));
        }
        let n = targets.len() / n_outputs;
        if targets.len() != n * n_outputs {
            return Err(Error::DimensionMismatch {
                context: "targets",
                expected: n * n_outputs,
                actual: targets.len(),
            });
        }
        if inputs.len() != n * lb * n_features {
            return Err(Error::DimensionMismatch {
                context: "inputs",
                expected: n * lb * n_features,
                actual: inputs.len(),
            });
        }
        Ok(Self {
            inputs,
            targets,
            lb,
            n_features,
            n_outputs,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len() / self.n_outputs
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn lb(&self) -> usize {
        self.lb
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// The `lb × n_features` input window of example `i`, row-major.
    pub fn input(&self, i: usize) -> &[f64] {
        let w = self.lb * self.n_features;
        &self.inputs[i * w..(i + 1) * w]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.n_outputs..(i + 1) * self.n_outputs]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Examples `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let w = self.lb * self.n_features;
        Self {
            inputs: self.inputs[range.start * w..range.end * w].to_vec(),
            targets: self.targets[range.start * self.n_outputs..range.end * self.n_outputs]
                .to_vec(),
            ..*self
        }
    }

    /// Appends `other` after `self`; shapes must agree.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if (self.lb, self.n_features, self.n_outputs)
            != (other.lb, other.n_features, other.n_outputs)
        {
            return Err(Error::Size("cannot concatenate differently shaped datasets".into()));
        }
        let mut inputs = self.inputs.clone();
        inputs.extend_from_slice(&other.inputs);
        let mut targets = self.targets.clone();
        targets.extend_from_slice(&other.targets);
        Ok(Self {
            inputs,
            targets,
            ..*self
        })
    }
}

/// Builds `len - lb` windows. All columns are inputs; the series' target
/// columns are the outputs.
pub fn window(ts: &TimeSeries, lb: usize) -> Result<WindowedDataset> {
    if lb == 0 {
        return Err(invalid("lb", "look back must be positive"));
    }
    if lb >= ts.len() {
        return Err(Error::Size(format!(
            "look back {lb} needs a series longer than {} rows",
            ts.len()
        )));
    }
    let n = ts.len() - lb;
    let n_features = ts.n_cols;
    let n_outputs = ts.target_columns.len();
    let mut inputs = Vec::with_capacity(n * lb * n_features);
    let mut targets = Vec::with_capacity(n * n_outputs);
    for i in 0..n {
        inputs.extend_from_slice(&ts.values[i * n_features..(i + lb) * n_features]);
        let next = ts.row(i + lb);
        targets.extend(ts.target_columns.iter().map(|&c| next[c]));
    }
    WindowedDataset::from_parts(inputs, targets, lb, n_features, n_outputs)
}

/// Chronological split: the first `ceil(fraction * n)` examples train.
pub fn split(ds: &WindowedDataset, fraction: f64) -> Result<(WindowedDataset, WindowedDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid("fraction", format!("must lie in (0, 1), got {fraction}")));
    }
    let n = ds.len();
    let n_train = (fraction * n as f64).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(invalid(
            "fraction",
            format!("{fraction} of {n} examples leaves an empty partition"),
        ));
    }
    Ok((ds.slice(0..n_train), ds.slice(n_train..n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    Train,
    #[default]
    Test,
    Full,
}

impl std::str::FromStr for EvalSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Self::Train),
            "test" => Ok(Self::Test),
            "full" => Ok(Self::Full),
            other => Err(invalid("eval_split", format!("unknown split `{other}`"))),
        }
    }
}

/// Chronological train/test partitions of one windowed dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: WindowedDataset,
    pub test: WindowedDataset,
}

impl Splits {
    pub fn new(ds: &WindowedDataset, fraction: f64) -> Result<Self> {
        let (train, test) = split(ds, fraction)?;
        Ok(Self { train, test })
    }

    pub fn select(&self, which: EvalSplit) -> Result<Cow<'_, WindowedDataset>> {
        Ok(match which {
            EvalSplit::Train => Cow::Borrowed(&self.train),
            EvalSplit::Test => Cow::Borrowed(&self.test),
            EvalSplit::Full => Cow::Owned(self.train.concat(&self.test)?),
        })
    }
}
