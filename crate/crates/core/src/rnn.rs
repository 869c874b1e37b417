//! Single-hidden-layer LSTM with a dense output layer.
//!
//! Parameters live in one flat vector. The layout is fixed: the four input
//! kernels `W_g [n_inputs x nc]` in gate order (input, forget, cell, output),
//! then the four recurrent kernels `U_g [nc x nc]`, then the four biases
//! `b_g [nc]`, then the dense kernel `[nc x n_outputs]` and dense bias.
//! Matrices are row-major with the source unit as the row index, so a gate
//! pre-activation is `x W_g + h U_g + b_g`.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;
use crate::timeseries::WindowedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Tanh,
    Sigmoid,
}

impl OutputActivation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Self::Tanh => z.tanh(),
            Self::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Self::Tanh => 1.0 - y * y,
            Self::Sigmoid => y * (1.0 - y),
        }
    }

    /// Range of the output: `[-1, 1]` for tanh, `[0, 1]` for sigmoid.
    pub fn range(self) -> (f64, f64) {
        match self {
            Self::Tanh => (-1.0, 1.0),
            Self::Sigmoid => (0.0, 1.0),
        }
    }

    /// Largest possible MAE against targets inside the output range.
    pub fn mae_upper_bound(self) -> f64 {
        let (lo, hi) = self.range();
        hi - lo
    }
}

impl fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tanh => "tanh",
            Self::Sigmoid => "sigmoid",
        })
    }
}

impl std::str::FromStr for OutputActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Self::Tanh),
            "sigmoid" => Ok(Self::Sigmoid),
            other => Err(invalid("activation", format!("unknown activation `{other}`"))),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Shape of a one-hidden-layer stacked LSTM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    /// Hidden LSTM cells.
    pub nc: usize,
    /// Look back (timesteps per window).
    pub lb: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub output_activation: OutputActivation,
}

impl ArchitectureSpec {
    pub fn new(
        nc: usize,
        lb: usize,
        n_inputs: usize,
        n_outputs: usize,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        let arch = Self {
            nc,
            lb,
            n_inputs,
            n_outputs,
            output_activation,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nc == 0 {
            return Err(invalid("nc", "at least one cell is required"));
        }
        if self.lb == 0 {
            return Err(invalid("lb", "look back must be positive"));
        }
        if self.n_inputs == 0 || self.n_outputs == 0 {
            return Err(invalid("n_inputs/n_outputs", "widths must be positive"));
        }
        Ok(())
    }

    pub fn check_dataset(&self, ds: &WindowedDataset) -> Result<()> {
        if ds.n_features() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                context: "dataset features",
                expected: self.n_inputs,
                actual: ds.n_features(),
            });
        }
        if ds.n_outputs() != self.n_outputs {
            return Err(Error::DimensionMismatch {
                context: "dataset outputs",
                expected: self.n_outputs,
                actual: ds.n_outputs(),
            });
        }
        if ds.lb() != self.lb {
            return Err(Error::DimensionMismatch {
                context: "dataset look back",
                expected: self.lb,
                actual: ds.lb(),
            });
        }
        Ok(())
    }
}

/// `4 nc (n_inputs + nc + 1) + nc n_outputs + n_outputs`.
pub fn param_count(arch: &ArchitectureSpec) -> usize {
    4 * arch.nc * (arch.n_inputs + arch.nc + 1) + arch.nc * arch.n_outputs + arch.n_outputs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Input,
    Forget,
    Cell,
    Output,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Cell, Gate::Output];

    fn suffix(self) -> &'static str {
        match self {
            Gate::Input => "i",
            Gate::Forget => "f",
            Gate::Cell => "c",
            Gate::Output => "o",
        }
    }
}

/// One contiguous block of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Offsets of every block for a given architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Offsets {
    pub kernel: usize,
    pub recurrent: usize,
    pub bias: usize,
    pub dense: usize,
    pub dense_bias: usize,
    pub total: usize,
}

impl Offsets {
    pub fn new(arch: &ArchitectureSpec) -> Self {
        let (n, nc, no) = (arch.n_inputs, arch.nc, arch.n_outputs);
        let kernel = 0;
        let recurrent = kernel + 4 * n * nc;
        let bias = recurrent + 4 * nc * nc;
        let dense = bias + 4 * nc;
        let dense_bias = dense + nc * no;
        Self {
            kernel,
            recurrent,
            bias,
            dense,
            dense_bias,
            total: dense_bias + no,
        }
    }
}

pub fn layout(arch: &ArchitectureSpec) -> Vec<Segment> {
    let off = Offsets::new(arch);
    let (n, nc, no) = (arch.n_inputs, arch.nc, arch.n_outputs);
    let mut segs = Vec::with_capacity(14);
    for (k, g) in Gate::ALL.iter().enumerate() {
        segs.push(Segment {
            name: format!("W_{}", g.suffix()),
            offset: off.kernel + k * n * nc,
            rows: n,
            cols: nc,
        });
    }
    for (k, g) in Gate::ALL.iter().enumerate() {
        segs.push(Segment {
            name: format!("U_{}", g.suffix()),
            offset: off.recurrent + k * nc * nc,
            rows: nc,
            cols: nc,
        });
    }
    for (k, g) in Gate::ALL.iter().enumerate() {
        segs.push(Segment {
            name: format!("b_{}", g.suffix()),
            offset: off.bias + k * nc,
            rows: 1,
            cols: nc,
        });
    }
    segs.push(Segment {
        name: "dense_kernel".into(),
        offset: off.dense,
        rows: nc,
        cols: no,
    });
    segs.push(Segment {
        name: "dense_bias".into(),
        offset: off.dense_bias,
        rows: 1,
        cols: no,
    });
    segs
}

/// A named, row-major matrix cut out of a [`WeightSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct NamedMatrix {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    arch: ArchitectureSpec,
    params: Vec<f64>,
}

impl WeightSet {
    pub fn from_vec(arch: ArchitectureSpec, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let expected = param_count(&arch);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "weight vector",
                expected,
                actual: params.len(),
            });
        }
        Ok(Self { arch, params })
    }

    pub fn zeros(arch: ArchitectureSpec) -> Self {
        Self {
            params: vec![0.0; param_count(&arch)],
            arch,
        }
    }

    pub fn arch(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn layout(&self) -> Vec<Segment> {
        layout(&self.arch)
    }

    /// The structured gate and dense matrices, in layout order.
    pub fn matrices(&self) -> Vec<NamedMatrix> {
        self.layout()
            .into_iter()
            .map(|s| NamedMatrix {
                data: self.params[s.range()].to_vec(),
                name: s.name,
                rows: s.rows,
                cols: s.cols,
            })
            .collect()
    }

    /// Inverse of [`WeightSet::matrices`].
    pub fn from_matrices(arch: ArchitectureSpec, mats: &[NamedMatrix]) -> Result<Self> {
        let segs = layout(&arch);
        if mats.len() != segs.len() {
            return Err(Error::WeightFormat(format!(
                "expected {} matrices, got {}",
                segs.len(),
                mats.len()
            )));
        }
        let mut params = vec![0.0; param_count(&arch)];
        for (s, m) in segs.iter().zip(mats) {
            if s.name != m.name || s.rows != m.rows || s.cols != m.cols || m.data.len() != s.len()
            {
                return Err(Error::WeightFormat(format!(
                    "matrix `{}` does not match segment `{}`",
                    m.name, s.name
                )));
            }
            params[s.range()].copy_from_slice(&m.data);
        }
        Self::from_vec(arch, params)
    }

    /// Writes a JSON descriptor line followed by one value per line.
    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        let header = WeightHeader {
            format: WEIGHT_FORMAT.to_string(),
            arch: self.arch,
            n_params: self.params.len(),
            layout: self.layout(),
        };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        for v in &self.params {
            writeln!(out, "{v:?}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_to(&mut out).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn read_from(input: impl std::io::Read) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::WeightFormat("empty file".into()))?
            .map_err(|e| Error::WeightFormat(e.to_string()))?;
        let header: WeightHeader = serde_json::from_str(&header_line)?;
        if header.format != WEIGHT_FORMAT {
            return Err(Error::WeightFormat(format!(
                "unsupported format `{}`",
                header.format
            )));
        }
        if header.layout != layout(&header.arch) {
            return Err(Error::WeightFormat("layout does not match architecture".into()));
        }
        let mut params = Vec::with_capacity(header.n_params);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::WeightFormat(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::WeightFormat(format!("value {i}: `{line}`")))?;
            params.push(v);
        }
        if params.len() != header.n_params {
            return Err(Error::WeightFormat(format!(
                "header promises {} values, found {}",
                header.n_params,
                params.len()
            )));
        }
        Self::from_vec(header.arch, params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(file)
    }
}

const WEIGHT_FORMAT: &str = "lstm-weights-v1";

#[derive(Debug, Serialize, Deserialize)]
struct WeightHeader {
    format: String,
    arch: ArchitectureSpec,
    n_params: usize,
    layout: Vec<Segment>,
}

/// Every parameter i.i.d. standard normal, drawn in layout order from a
/// ChaCha stream keyed by `seed`.
pub fn sample_weights(arch: &ArchitectureSpec, seed: u64) -> WeightSet {
    let mut rng = seed::rng(seed);
    let params = (0..param_count(arch))
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    WeightSet {
        arch: *arch,
        params,
    }
}

/// Glorot-uniform kernels, zero biases except a unit forget bias. Used as
/// the fresh starting point for gradient training.
pub fn glorot_weights(arch: &ArchitectureSpec, seed: u64) -> WeightSet {
    let mut rng = seed::rng(seed);
    let off = Offsets::new(arch);
    let mut w = WeightSet::zeros(*arch);
    let (n, nc, no) = (arch.n_inputs, arch.nc, arch.n_outputs);
    let mut fill = |range: std::ops::Range<usize>, fan_in: usize, fan_out: usize, p: &mut [f64]| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for v in &mut p[range] {
            *v = rng.gen_range(-limit..limit);
        }
    };
    fill(off.kernel..off.recurrent, n, 4 * nc, &mut w.params);
    fill(off.recurrent..off.bias, nc, 4 * nc, &mut w.params);
    fill(off.dense..off.dense_bias, nc, no, &mut w.params);
    for v in &mut w.params[off.bias + nc..off.bias + 2 * nc] {
        *v = 1.0;
    }
    w
}

/// Borrowed view used by the forward pass.
pub(crate) struct Cell<'a> {
    pub nc: usize,
    pub n_in: usize,
    pub p: &'a [f64],
    pub off: Offsets,
}

impl<'a> Cell<'a> {
    pub fn new(w: &'a WeightSet) -> Self {
        Self {
            nc: w.arch.nc,
            n_in: w.arch.n_inputs,
            p: &w.params,
            off: Offsets::new(&w.arch),
        }
    }

    /// Fills `z` (length `4 nc`, gate-major) with `x W + h U + b`.
    #[inline]
    pub fn preactivations(&self, x: &[f64], h: &[f64], z: &mut [f64]) {
        let nc = self.nc;
        z.copy_from_slice(&self.p[self.off.bias..self.off.bias + 4 * nc]);
        for g in 0..4 {
            let zg = &mut z[g * nc..(g + 1) * nc];
            let kbase = self.off.kernel + g * self.n_in * nc;
            for (j, &xj) in x.iter().enumerate() {
                if xj == 0.0 {
                    continue;
                }
                let row = &self.p[kbase + j * nc..kbase + (j + 1) * nc];
                for (zk, wk) in zg.iter_mut().zip(row) {
                    *zk += xj * wk;
                }
            }
            let rbase = self.off.recurrent + g * nc * nc;
            for (m, &hm) in h.iter().enumerate() {
                if hm == 0.0 {
                    continue;
                }
                let row = &self.p[rbase + m * nc..rbase + (m + 1) * nc];
                for (zk, uk) in zg.iter_mut().zip(row) {
                    *zk += hm * uk;
                }
            }
        }
    }

    /// Turns pre-activations into gate values in place and updates `h`, `c`.
    #[inline]
    pub fn advance(&self, z: &mut [f64], h: &mut [f64], c: &mut [f64]) {
        let nc = self.nc;
        for k in 0..nc {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[nc + k]);
            let g = z[2 * nc + k].tanh();
            let o = sigmoid(z[3 * nc + k]);
            let cn = f * c[k] + i * g;
            z[k] = i;
            z[nc + k] = f;
            z[2 * nc + k] = g;
            z[3 * nc + k] = o;
            c[k] = cn;
            h[k] = o * cn.tanh();
        }
    }

    /// Dense layer pre-activation for output `q`.
    #[inline]
    pub fn dense(&self, h: &[f64], q: usize, n_out: usize) -> f64 {
        let mut z = self.p[self.off.dense_bias + q];
        for (m, &hm) in h.iter().enumerate() {
            z += hm * self.p[self.off.dense + m * n_out + q];
        }
        z
    }
}

/// One LSTM timestep, returning the new `(h, c)`.
pub fn lstm_step(
    w: &WeightSet,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let arch = w.arch;
    for (context, expected, actual) in [
        ("x_t", arch.n_inputs, x.len()),
        ("h_prev", arch.nc, h_prev.len()),
        ("c_prev", arch.nc, c_prev.len()),
    ] {
        if expected != actual {
            return Err(Error::DimensionMismatch {
                context,
                expected,
                actual,
            });
        }
    }
    let cell = Cell::new(w);
    let mut z = vec![0.0; 4 * arch.nc];
    let mut h = h_prev.to_vec();
    let mut c = c_prev.to_vec();
    cell.preactivations(x, h_prev, &mut z);
    cell.advance(&mut z, &mut h, &mut c);
    Ok((h, c))
}

/// Runs every window from a zero state and returns the row-major
/// `[n_examples x n_outputs]` prediction matrix.
pub fn predict(w: &WeightSet, ds: &WindowedDataset) -> Result<Vec<f64>> {
    let arch = w.arch;
    arch.check_dataset(ds)?;
    let cell = Cell::new(w);
    let (nc, n_in, no) = (arch.nc, arch.n_inputs, arch.n_outputs);
    let mut out = Vec::with_capacity(ds.len() * no);
    let mut h = vec![0.0; nc];
    let mut c = vec![0.0; nc];
    let mut z = vec![0.0; 4 * nc];
    for e in 0..ds.len() {
        h.fill(0.0);
        c.fill(0.0);
        for x in ds.input(e).chunks_exact(n_in) {
            cell.preactivations(x, &h, &mut z);
            cell.advance(&mut z, &mut h, &mut c);
        }
        for q in 0..no {
            out.push(arch.output_activation.apply(cell.dense(&h, q, no)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arch(nc: usize, lb: usize, act: OutputActivation) -> ArchitectureSpec {
        ArchitectureSpec::new(nc, lb, 1, 1, act).unwrap()
    }

    /// Counts parameters by walking every individual weight.
    fn enumerate_params(nc: usize, n_in: usize, n_out: usize) -> usize {
        let mut count = 0;
        for _gate in 0..4 {
            for _ in 0..n_in {
                for _ in 0..nc {
                    count += 1;
                }
            }
            for _ in 0..nc {
                for _ in 0..nc {
                    count += 1;
                }
            }
            for _ in 0..nc {
                count += 1;
            }
        }
        for _ in 0..nc {
            for _ in 0..n_out {
                count += 1;
            }
        }
        count + n_out
    }

    #[test]
    fn param_count_matches_enumeration() {
        for &(nc, n_in, n_out, expected) in
            &[(1, 1, 1, 14), (100, 1, 1, 40901), (100, 26, 2, 51002)]
        {
            let a = ArchitectureSpec::new(nc, 30, n_in, n_out, OutputActivation::Tanh).unwrap();
            assert_eq!(enumerate_params(nc, n_in, n_out), expected);
            assert_eq!(param_count(&a), expected);
        }
    }

    #[test]
    fn layout_is_contiguous() {
        let a = ArchitectureSpec::new(3, 2, 4, 2, OutputActivation::Sigmoid).unwrap();
        let segs = layout(&a);
        let mut next = 0;
        for s in &segs {
            assert_eq!(s.offset, next);
            next += s.len();
        }
        assert_eq!(next, param_count(&a));
        assert_eq!(segs[0].name, "W_i");
        assert_eq!(segs[5].name, "U_f");
        assert_eq!(segs[10].name, "b_c");
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = arch(5, 3, OutputActivation::Tanh);
        let w1 = sample_weights(&a, 99);
        let w2 = sample_weights(&a, 99);
        assert_eq!(w1.params().len(), param_count(&a));
        assert!(w1
            .params()
            .iter()
            .zip(w2.params())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(w1, sample_weights(&a, 100));
    }

    #[test]
    fn sampled_weights_are_standard_normal() {
        let a = arch(50, 1, OutputActivation::Tanh);
        let mut pool = Vec::new();
        let mut s = 0;
        while pool.len() < 100_000 {
            pool.extend_from_slice(sample_weights(&a, s).params());
            s += 1;
        }
        let n = pool.len() as f64;
        let mean = pool.iter().sum::<f64>() / n;
        let sd = (pool.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((0.98..=1.02).contains(&sd), "sd {sd}");
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let a = ArchitectureSpec::new(3, 1, 2, 1, OutputActivation::Tanh).unwrap();
        let w = WeightSet::zeros(a);
        let (h, c) = lstm_step(&w, &[0.7, -3.0], &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);
    }

    #[test]
    fn saturated_gates_carry_cell() {
        let a = arch(1, 1, OutputActivation::Tanh);
        let mut w = WeightSet::zeros(a);
        let off = Offsets::new(&a);
        w.params_mut()[off.bias] = 40.0;
        w.params_mut()[off.bias + 1] = 40.0;
        w.params_mut()[off.bias + 3] = 40.0;
        let (h, c) = lstm_step(&w, &[0.42], &[0.0], &[0.3]).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-15);
        assert!((h[0] - 0.3f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = arch(2, 1, OutputActivation::Tanh);
        let w = WeightSet::zeros(a);
        assert!(lstm_step(&w, &[1.0, 2.0], &[0.0; 2], &[0.0; 2]).is_err());
        assert!(lstm_step(&w, &[1.0], &[0.0; 3], &[0.0; 2]).is_err());
        assert!(WeightSet::from_vec(a, vec![0.0; 3]).is_err());
    }

    #[test]
    fn zero_weights_predict_activation_midpoint() {
        let ts = crate::timeseries::TimeSeries::univariate("y", vec![0.1, 0.5, 0.9, 0.3, 0.2])
            .unwrap();
        let ds = crate::timeseries::window(&ts, 2).unwrap();
        let sig = predict(&WeightSet::zeros(arch(4, 2, OutputActivation::Sigmoid)), &ds).unwrap();
        assert!(sig.iter().all(|&v| v == 0.5));
        let tanh = predict(&WeightSet::zeros(arch(4, 2, OutputActivation::Tanh)), &ds).unwrap();
        assert!(tanh.iter().all(|&v| v == 0.0));
        assert!(predict(&WeightSet::zeros(arch(4, 3, OutputActivation::Tanh)), &ds).is_err());
    }

    #[test]
    fn weight_file_round_trip() {
        let a = ArchitectureSpec::new(3, 4, 2, 2, OutputActivation::Sigmoid).unwrap();
        let w = sample_weights(&a, 5);
        let mut buf = Vec::new();
        w.write_to(&mut buf).unwrap();
        let back = WeightSet::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, w);

        let truncated = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = truncated.lines().take(5).collect();
        assert!(WeightSet::read_from(cut.join("\n").as_bytes()).is_err());
    }

    #[test]
    fn glorot_init_shape() {
        let a = ArchitectureSpec::new(4, 3, 1, 1, OutputActivation::Tanh).unwrap();
        let w = glorot_weights(&a, 1);
        let off = Offsets::new(&a);
        assert_eq!(&w.params()[off.bias + 4..off.bias + 8], &[1.0; 4]);
        let limit = (6.0f64 / 17.0).sqrt();
        assert!(w.params()[..off.recurrent].iter().all(|v| v.abs() < limit));
    }

    proptest! {
        #[test]
        fn matrices_round_trip(nc in 1usize..5, n_in in 1usize..4, n_out in 1usize..3, s in any::<u64>()) {
            let a = ArchitectureSpec::new(nc, 2, n_in, n_out, OutputActivation::Tanh).unwrap();
            let w = sample_weights(&a, s);
            let back = WeightSet::from_matrices(a, &w.matrices()).unwrap();
            prop_assert_eq!(back, w);
        }

        #[test]
        fn predictions_stay_in_range(nc in 1usize..6, lb in 1usize..5, s in any::<u64>(), scale in 0.1f64..50.0) {
            for act in [OutputActivation::Tanh, OutputActivation::Sigmoid] {
                let a = arch(nc, lb, act);
                let mut w = sample_weights(&a, s);
                w.params_mut().iter_mut().for_each(|v| *v *= scale);
                let ts = crate::timeseries::generate_sine(&crate::timeseries::SineParams {
                    t_end: 2.0, ..Default::default()
                }).unwrap();
                let ds = crate::timeseries::window(&ts, lb).unwrap();
                let (lo, hi) = act.range();
                let out = predict(&w, &ds).unwrap();
                prop_assert!(out.iter().all(|v| v.is_finite() && (lo..=hi).contains(v)));
            }
        }

        #[test]
        fn param_count_increases_with_cells(nc in 1usize..200, n_in in 1usize..30, n_out in 1usize..4) {
            let a = ArchitectureSpec::new(nc, 1, n_in, n_out, OutputActivation::Tanh).unwrap();
            let b = ArchitectureSpec { nc: nc + 1, ..a };
            prop_assert!(param_count(&b) > param_count(&a));
        }
    }
}
