//! MAE random sampling.
//!
//! For one architecture: draw `max_samples` independent N(0, 1) weight sets,
//! record the MAE of each untrained network on the evaluation data, fit a
//! truncated normal to those errors on the range the output activation
//! allows, and report `p_t`, the fitted probability that a draw reaches
//! MAE <= threshold. Architectures are then ranked by `p_t`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rnn::{predict, sample_weights, ArchitectureSpec, WeightSet};
use crate::seed;
use crate::stats::{fit_truncated_normal, TruncatedNormalFit};
pub use crate::timeseries::EvalSplit;
use crate::timeseries::{Splits, WindowedDataset};

/// Smallest reported `ln p_t`; keeps the value representable.
pub const LOG_P_FLOOR: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub max_samples: usize,
    pub threshold: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub eval_split: EvalSplit,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            max_samples: 1000,
            threshold: 0.01,
            seed: 0,
            eval_split: EvalSplit::Test,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_samples < 2 {
            return Err(invalid("max_samples", "a fit needs at least 2 samples"));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(invalid("threshold", "must be a positive number"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub arch_id: usize,
    pub arch: ArchitectureSpec,
    pub maes: Vec<f64>,
    pub fit: TruncatedNormalFit,
    pub p_t: f64,
    pub log_p_t: f64,
    pub best_sample_seed: u64,
    pub best_mae: f64,
    pub mean_raw: f64,
    pub sd_raw: f64,
}

impl SampleOutcome {
    /// Rebuilds the minimum-MAE weight draw.
    pub fn best_weights(&self) -> WeightSet {
        sample_weights(&self.arch, self.best_sample_seed)
    }
}

/// Mean absolute error over every cell of two equally shaped matrices.
pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            context: "mae",
            expected: actual.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Size("mae of an empty matrix".into()));
    }
    let total: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(total / pred.len() as f64)
}

/// Seed of draw `k` for `arch`. Independent of every other draw.
pub fn sample_seed(base: u64, arch: &ArchitectureSpec, k: usize) -> u64 {
    seed::derive(&[base, seed::TAG_SAMPLE, arch.nc as u64, arch.lb as u64, k as u64])
}

/// MAE of the network with weights `w` on `ds`.
pub fn evaluate(w: &WeightSet, ds: &WindowedDataset) -> Result<f64> {
    mae(&predict(w, ds)?, ds.targets())
}

/// Runs the sampler on the split selected by `cfg.eval_split`.
pub fn mae_random_sampling(
    arch: &ArchitectureSpec,
    splits: &Splits,
    cfg: &SamplingConfig,
) -> Result<SampleOutcome> {
    let ds = splits.select(cfg.eval_split)?;
    sample_on(arch, &ds, cfg)
}

/// Runs the sampler on an explicit evaluation dataset.
pub fn sample_on(
    arch: &ArchitectureSpec,
    ds: &WindowedDataset,
    cfg: &SamplingConfig,
) -> Result<SampleOutcome> {
    cfg.validate()?;
    arch.validate()?;
    arch.check_dataset(ds)?;
    let maes = (0..cfg.max_samples)
        .into_par_iter()
        .map(|k| evaluate(&sample_weights(arch, sample_seed(cfg.seed, arch, k)), ds))
        .collect::<Result<Vec<f64>>>()?;
    summarize(*arch, maes, cfg)
}

/// Fits the error density to already collected MAE draws.
pub(crate) fn summarize(
    arch: ArchitectureSpec,
    maes: Vec<f64>,
    cfg: &SamplingConfig,
) -> Result<SampleOutcome> {
    let upper = arch.output_activation.mae_upper_bound();
    // Rounding can push an MAE a hair past the bound when predictions saturate.
    let maes: Vec<f64> = maes.into_iter().map(|m| m.clamp(0.0, upper)).collect();
    let fit = fit_truncated_normal(&maes, 0.0, upper)?;
    let log_p_t = fit.log_cdf(cfg.threshold).max(LOG_P_FLOOR);
    let p_t = fit.cdf(cfg.threshold);
    let (best_k, best_mae) = maes
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("max_samples >= 2");
    Ok(SampleOutcome {
        arch_id: 0,
        arch,
        mean_raw: crate::stats::mean(&maes),
        sd_raw: crate::stats::sample_sd(&maes),
        best_sample_seed: sample_seed(cfg.seed, &arch, best_k),
        best_mae,
        maes,
        fit,
        p_t,
        log_p_t,
    })
}

/// Position of one outcome in a ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// 1-based position, 1 = most promising.
    pub rank: usize,
    /// Index into the ranked outcome list.
    pub index: usize,
    pub arch_id: usize,
    pub nc: usize,
    pub lb: usize,
    pub p_t: f64,
    pub log_p_t: f64,
    pub decile: u8,
}

/// Orders outcomes by `p_t` (compared through `log_p_t`, so values that
/// underflow to 0 still order), ties broken by `nc`, `lb`, then `arch_id`.
/// Deciles are assigned by position, decile 1 first.
pub fn rank_architectures(outcomes: &[SampleOutcome]) -> Result<Vec<RankEntry>> {
    if outcomes.is_empty() {
        return Err(Error::Size("cannot rank an empty outcome list".into()));
    }
    let mut order: Vec<usize> = (0..outcomes.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&outcomes[a], &outcomes[b]);
        y.log_p_t
            .total_cmp(&x.log_p_t)
            .then(y.p_t.total_cmp(&x.p_t))
            .then(x.arch.nc.cmp(&y.arch.nc))
            .then(x.arch.lb.cmp(&y.arch.lb))
            .then(x.arch_id.cmp(&y.arch_id))
    });
    let n = order.len();
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(pos, i)| {
            let o = &outcomes[i];
            RankEntry {
                rank: pos + 1,
                index: i,
                arch_id: o.arch_id,
                nc: o.arch.nc,
                lb: o.arch.lb,
                p_t: o.p_t,
                log_p_t: o.log_p_t,
                decile: (pos * 10 / n + 1) as u8,
            }
        })
        .collect())
}

pub const OUTCOME_COLUMNS: [&str; 11] = [
    "arch_id", "nc", "lb", "n_samples", "mean_fit", "sd_fit", "p_t", "log_p_t", "best_mae",
    "mean_raw", "sd_raw",
];

pub(crate) fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_outcomes_csv(outcomes: &[SampleOutcome], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OUTCOME_COLUMNS)?;
    for o in outcomes {
        w.write_record([
            o.arch_id.to_string(),
            o.arch.nc.to_string(),
            o.arch.lb.to_string(),
            o.maes.len().to_string(),
            num(o.fit.mu),
            num(o.fit.sigma),
            num(o.p_t),
            num(o.log_p_t),
            num(o.best_mae),
            num(o.mean_raw),
            num(o.sd_raw),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_ranking_csv(ranking: &[RankEntry], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "arch_id", "nc", "lb", "p_t", "log_p_t", "decile"])?;
    for r in ranking {
        w.write_record([
            r.rank.to_string(),
            r.arch_id.to_string(),
            r.nc.to_string(),
            r.lb.to_string(),
            num(r.p_t),
            num(r.log_p_t),
            r.decile.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
