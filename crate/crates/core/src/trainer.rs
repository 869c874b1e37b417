//! Gradient training with backpropagation through time and Adam.
//!
//! The loss is the batch-mean absolute error, the same quantity the sampler
//! measures. Its subgradient at a zero residual is taken as 0.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rnn::{glorot_weights, ArchitectureSpec, Cell, WeightSet};
use crate::sampling::evaluate;
use crate::seed;
use crate::timeseries::WindowedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Rescale the gradient to this global L2 norm when it is exceeded.
    pub clip_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            clip_norm: None,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate", "must be > 0"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(invalid(name, format!("must lie in (0, 1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(invalid("clip_norm", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Reusable per-step caches for one example.
struct Tape {
    /// Gate activations `[i | f | g | o]` per step.
    gates: Vec<f64>,
    /// Cell state after each step.
    c: Vec<f64>,
    /// Hidden state after each step.
    h: Vec<f64>,
    dz: Vec<f64>,
    dh: Vec<f64>,
    dh_prev: Vec<f64>,
    dc: Vec<f64>,
    h_run: Vec<f64>,
    c_run: Vec<f64>,
}

impl Tape {
    fn new(nc: usize, lb: usize) -> Self {
        Self {
            gates: vec![0.0; 4 * nc * lb],
            c: vec![0.0; nc * lb],
            h: vec![0.0; nc * lb],
            dz: vec![0.0; 4 * nc],
            dh: vec![0.0; nc],
            dh_prev: vec![0.0; nc],
            dc: vec![0.0; nc],
            h_run: vec![0.0; nc],
            c_run: vec![0.0; nc],
        }
    }
}

/// Adds the gradient of `scale * sum_q |y_q - t_q|` for one example to
/// `grad`, returning the example's absolute error sum.
fn accumulate_example(
    cell: &Cell<'_>,
    arch: &ArchitectureSpec,
    x: &[f64],
    target: &[f64],
    scale: f64,
    tape: &mut Tape,
    grad: &mut [f64],
) -> f64 {
    let (nc, n_in, no, lb) = (arch.nc, arch.n_inputs, arch.n_outputs, arch.lb);
    let off = cell.off;
    let p = cell.p;

    tape.h_run.fill(0.0);
    tape.c_run.fill(0.0);
    for t in 0..lb {
        let z = &mut tape.gates[4 * nc * t..4 * nc * (t + 1)];
        cell.preactivations(&x[t * n_in..(t + 1) * n_in], &tape.h_run, z);
        cell.advance(z, &mut tape.h_run, &mut tape.c_run);
        tape.h[t * nc..(t + 1) * nc].copy_from_slice(&tape.h_run);
        tape.c[t * nc..(t + 1) * nc].copy_from_slice(&tape.c_run);
    }

    let h_last = &tape.h[(lb - 1) * nc..lb * nc];
    let mut abs_err = 0.0;
    tape.dh.fill(0.0);
    for q in 0..no {
        let y = arch.output_activation.apply(cell.dense(h_last, q, no));
        let r = y - target[q];
        abs_err += r.abs();
        let sign = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        let dzd = scale * sign * arch.output_activation.derivative_from_output(y);
        if dzd == 0.0 {
            continue;
        }
        grad[off.dense_bias + q] += dzd;
        for m in 0..nc {
            grad[off.dense + m * no + q] += h_last[m] * dzd;
            tape.dh[m] += p[off.dense + m * no + q] * dzd;
        }
    }

    tape.dc.fill(0.0);
    for t in (0..lb).rev() {
        let gates = &tape.gates[4 * nc * t..4 * nc * (t + 1)];
        let c_t = &tape.c[t * nc..(t + 1) * nc];
        for k in 0..nc {
            let (i, f, g, o) = (gates[k], gates[nc + k], gates[2 * nc + k], gates[3 * nc + k]);
            let c_prev = if t == 0 { 0.0 } else { tape.c[(t - 1) * nc + k] };
            let tc = c_t[k].tanh();
            let dc = tape.dc[k] + tape.dh[k] * o * (1.0 - tc * tc);
            let do_ = tape.dh[k] * tc;
            tape.dz[k] = dc * g * i * (1.0 - i);
            tape.dz[nc + k] = dc * c_prev * f * (1.0 - f);
            tape.dz[2 * nc + k] = dc * i * (1.0 - g * g);
            tape.dz[3 * nc + k] = do_ * o * (1.0 - o);
            tape.dc[k] = dc * f;
        }

        let x_t = &x[t * n_in..(t + 1) * n_in];
        tape.dh_prev.fill(0.0);
        for gi in 0..4 {
            let dzg = &tape.dz[gi * nc..(gi + 1) * nc];
            for (b, d) in grad[off.bias + gi * nc..off.bias + (gi + 1) * nc]
                .iter_mut()
                .zip(dzg)
            {
                *b += d;
            }
            let kbase = off.kernel + gi * n_in * nc;
            for (j, &xj) in x_t.iter().enumerate() {
                if xj == 0.0 {
                    continue;
                }
                for (gw, d) in grad[kbase + j * nc..kbase + (j + 1) * nc].iter_mut().zip(dzg) {
                    *gw += xj * d;
                }
            }
            if t > 0 {
                let h_prev = &tape.h[(t - 1) * nc..t * nc];
                let rbase = off.recurrent + gi * nc * nc;
                for m in 0..nc {
                    let row = rbase + m * nc..rbase + (m + 1) * nc;
                    let hm = h_prev[m];
                    let mut acc = 0.0;
                    for ((gu, u), d) in grad[row.clone()].iter_mut().zip(&p[row]).zip(dzg) {
                        *gu += hm * d;
                        acc += u * d;
                    }
                    tape.dh_prev[m] += acc;
                }
            }
        }
        std::mem::swap(&mut tape.dh, &mut tape.dh_prev);
    }
    abs_err
}

/// Gradient of the mean absolute error over the examples `batch` of `ds`,
/// in the flat weight layout, along with that batch MAE.
pub fn bptt_gradient(
    w: &WeightSet,
    ds: &WindowedDataset,
    batch: &[usize],
) -> Result<(Vec<f64>, f64)> {
    let arch = *w.arch();
    arch.check_dataset(ds)?;
    if batch.is_empty() {
        return Err(Error::Size("empty gradient batch".into()));
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= ds.len()) {
        return Err(Error::Size(format!("batch index {bad} out of range")));
    }
    let cell = Cell::new(w);
    let scale = 1.0 / (batch.len() * arch.n_outputs) as f64;
    let mut grad = vec![0.0; w.params().len()];
    let mut tape = Tape::new(arch.nc, arch.lb);
    let mut total = 0.0;
    for &e in batch {
        total += accumulate_example(&cell, &arch, ds.input(e), ds.target(e), scale, &mut tape, &mut grad);
    }
    Ok((grad, total * scale))
}

/// Adam moment estimates and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, w: &mut [f64], grad: &[f64], cfg: &AdamConfig) {
        self.t += 1;
        adam_step(w, grad, &mut self.m, &mut self.v, self.t, cfg);
    }
}

/// One bias-corrected Adam update at step `t >= 1`.
pub fn adam_step(w: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &AdamConfig) {
    debug_assert!(t >= 1);
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let c1 = 1.0 - b1.powf(t as f64);
    let c2 = 1.0 - b2.powf(t as f64);
    for (((wi, &g), mi), vi) in w.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut()) {
        *mi = b1 * *mi + (1.0 - b1) * g;
        *vi = b2 * *vi + (1.0 - b2) * g * g;
        let m_hat = *mi / c1;
        let v_hat = *vi / c2;
        *wi -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

fn clip_global_norm(grad: &mut [f64], max_norm: f64) {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
}

/// Where training starts.
#[derive(Debug, Clone)]
pub enum Init {
    Weights(WeightSet),
    /// Glorot-uniform draw keyed by the run seed.
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub arch: ArchitectureSpec,
    pub config: AdamConfig,
    pub initial_weights: WeightSet,
    pub final_weights: WeightSet,
    pub epochs_completed: usize,
    pub initial_train_mae: f64,
    pub initial_test_mae: f64,
    /// Full-training-set MAE after each epoch.
    pub train_mae_history: Vec<f64>,
    pub test_mae: f64,
    /// Test MAE after selected epoch counts, in ascending epoch order.
    pub checkpoints: Vec<(usize, f64)>,
}

/// Serializable view of a run without the weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub arch: ArchitectureSpec,
    pub config: AdamConfig,
    pub epochs_completed: usize,
    pub initial_train_mae: f64,
    pub initial_test_mae: f64,
    pub train_mae_history: Vec<f64>,
    pub test_mae: f64,
    pub checkpoints: Vec<(usize, f64)>,
}

impl TrainingRun {
    pub fn summary(&self) -> TrainingSummary {
        TrainingSummary {
            arch: self.arch,
            config: self.config,
            epochs_completed: self.epochs_completed,
            initial_train_mae: self.initial_train_mae,
            initial_test_mae: self.initial_test_mae,
            train_mae_history: self.train_mae_history.clone(),
            test_mae: self.test_mae,
            checkpoints: self.checkpoints.clone(),
        }
    }
}

pub fn train(
    arch: &ArchitectureSpec,
    train_ds: &WindowedDataset,
    test_ds: &WindowedDataset,
    cfg: &AdamConfig,
    init: Init,
) -> Result<TrainingRun> {
    train_with_checkpoints(arch, train_ds, test_ds, cfg, init, &[])
}

/// Like [`train`], also recording the test MAE after each epoch count in
/// `checkpoints` (0 means the initial weights). Epoch shuffles depend only
/// on `(seed, epoch)`, so a checkpoint at epoch `e` equals the final test
/// MAE of an `e`-epoch run.
pub fn train_with_checkpoints(
    arch: &ArchitectureSpec,
    train_ds: &WindowedDataset,
    test_ds: &WindowedDataset,
    cfg: &AdamConfig,
    init: Init,
    checkpoints: &[usize],
) -> Result<TrainingRun> {
    cfg.validate()?;
    arch.check_dataset(train_ds)?;
    arch.check_dataset(test_ds)?;
    if train_ds.is_empty() || test_ds.is_empty() {
        return Err(Error::Size("training needs non-empty train and test sets".into()));
    }
    let initial = match init {
        Init::Weights(w) => {
            if w.arch() != arch {
                return Err(invalid("init", "initial weights belong to another architecture"));
            }
            w
        }
        Init::Fresh => glorot_weights(arch, seed::derive(&[cfg.seed, seed::TAG_TRAIN_INIT])),
    };
    let initial_train_mae = evaluate(&initial, train_ds)?;
    let initial_test_mae = evaluate(&initial, test_ds)?;

    let mut wanted: Vec<usize> = checkpoints.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut recorded = Vec::new();
    if wanted.first() == Some(&0) {
        recorded.push((0, initial_test_mae));
    }

    let mut w = initial.clone();
    let mut adam = AdamState::new(w.params().len());
    let mut order: Vec<usize> = (0..train_ds.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = seed::rng(seed::derive(&[cfg.seed, seed::TAG_EPOCH, epoch as u64]));
        order.sort_unstable();
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (mut grad, _) = bptt_gradient(&w, train_ds, batch)?;
            if let Some(c) = cfg.clip_norm {
                clip_global_norm(&mut grad, c);
            }
            adam.step(w.params_mut(), &grad, cfg);
        }
        history.push(evaluate(&w, train_ds)?);
        if wanted.binary_search(&(epoch + 1)).is_ok() {
            recorded.push((epoch + 1, evaluate(&w, test_ds)?));
        }
    }
    let test_mae = evaluate(&w, test_ds)?;
    Ok(TrainingRun {
        arch: *arch,
        config: *cfg,
        initial_weights: initial,
        final_weights: w,
        epochs_completed: cfg.epochs,
        initial_train_mae,
        initial_test_mae,
        train_mae_history: history,
        test_mae,
        checkpoints: recorded,
    })
}
