//! The validation pipeline: sample a grid of architectures, rank them into
//! deciles by `p_t`, train a stratified subsample with Adam, correlate the
//! trained errors with the sampling statistics, and check how well a linear
//! model on those statistics predicts the trained error of held-out
//! architectures.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rnn::{ArchitectureSpec, OutputActivation};
use crate::sampling::{mae_random_sampling, num, rank_architectures, SampleOutcome, SamplingConfig};
use crate::seed;
use crate::stats::{assign_deciles, ols_fit, ols_predict, pearson, spearman};
use crate::timeseries::{generate_sine, load_csv, minmax_scale, window, SineParams, Splits, TimeSeries};
use crate::trainer::{train_with_checkpoints, AdamConfig, Init};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// `p_t` alone.
    POnly,
    /// Fitted mean, fitted sd and `ln p_t`.
    #[default]
    MeanSdLogp,
}

impl FeatureSet {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Self::POnly => &["p_t"],
            Self::MeanSdLogp => &["mean_fit", "sd_fit", "log_p_t"],
        }
    }

    fn row(self, o: &SampleOutcome) -> Vec<f64> {
        match self {
            Self::POnly => vec![o.p_t],
            Self::MeanSdLogp => vec![o.fit.mu, o.fit.sigma, o.log_p_t],
        }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub seed: u64,
    pub grid: Vec<ArchitectureSpec>,
    /// Human-readable description of how the grid was built.
    pub grid_label: String,
    pub split_fraction: f64,
    pub sampling: SamplingConfig,
    pub training: AdamConfig,
    /// Epoch counts at which trained test MAE is recorded; the largest is
    /// the training length and the one the linear model predicts.
    pub epoch_budgets: Vec<usize>,
    pub per_decile: usize,
    pub repetitions: usize,
    pub fit_fraction: f64,
    pub feature_set: FeatureSet,
    pub warm_start: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 10 {
            return Err(invalid(
                "grid",
                format!("deciles need at least 10 architectures, got {}", self.grid.len()),
            ));
        }
        for a in &self.grid {
            a.validate()?;
        }
        self.sampling.validate()?;
        self.training.validate()?;
        if self.per_decile == 0 {
            return Err(invalid("per_decile", "must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions", "must be at least 1"));
        }
        if !(self.fit_fraction > 0.0 && self.fit_fraction < 1.0) {
            return Err(invalid("fit_fraction", "must lie in (0, 1)"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(invalid("split_fraction", "must lie in (0, 1)"));
        }
        if self.epoch_budgets.is_empty() {
            return Err(invalid("epoch_budgets", "at least one budget is required"));
        }
        Ok(())
    }

    fn final_epochs(&self) -> usize {
        self.epoch_budgets.iter().copied().max().unwrap_or(0)
    }
}

/// Parses `a..b` (inclusive), a single value, or a comma list of either.
/// Repeated values are kept once, at their first position.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || invalid("grid", format!("cannot parse `{part}`"));
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(invalid("grid", format!("empty range `{part}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|v| seen.insert(*v));
    if out.is_empty() {
        return Err(invalid("grid", "no values"));
    }
    Ok(out)
}

/// Cartesian `nc x lb` grid, ordered by `lb` then `nc`.
pub fn build_grid(
    ncs: &[usize],
    lbs: &[usize],
    n_inputs: usize,
    n_outputs: usize,
    act: OutputActivation,
) -> Result<Vec<ArchitectureSpec>> {
    let mut grid = Vec::with_capacity(ncs.len() * lbs.len());
    for &lb in lbs {
        for &nc in ncs {
            grid.push(ArchitectureSpec::new(nc, lb, n_inputs, n_outputs, act)?);
        }
    }
    Ok(grid)
}

/// One row of the ranked outcome table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub rank: usize,
    pub decile: u8,
    pub arch_id: usize,
    pub nc: usize,
    pub lb: usize,
    pub n_samples: usize,
    pub mean_fit: f64,
    pub sd_fit: f64,
    pub fit_converged: bool,
    pub p_t: f64,
    pub log_p_t: f64,
    pub best_mae: f64,
    pub mean_raw: f64,
    pub sd_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRow {
    pub arch_id: usize,
    pub nc: usize,
    pub lb: usize,
    pub decile: u8,
    pub mean_fit: f64,
    pub sd_fit: f64,
    pub p_t: f64,
    pub log_p_t: f64,
    pub initial_test_mae: f64,
    pub final_train_mae: f64,
    /// `(epochs, test MAE)` for every budget.
    pub test_mae: Vec<(usize, f64)>,
}

impl TrainedRow {
    fn mae_at(&self, epochs: usize) -> Option<f64> {
        self.test_mae.iter().find(|(e, _)| *e == epochs).map(|(_, m)| *m)
    }
}

/// Pearson correlation of trained MAE against each candidate predictor.
/// `None` where the correlation is undefined (for example a constant `lb`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub epochs: usize,
    pub nc: Option<f64>,
    pub lb: Option<f64>,
    pub mean_fit: Option<f64>,
    pub sd_fit: Option<f64>,
    pub log_p_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionEval {
    pub repetition: usize,
    /// Why the repetition was not evaluated, if it was not.
    pub skipped: Option<String>,
    pub n_fit: usize,
    pub n_test: usize,
    pub coefficients: Vec<f64>,
    /// Residual standard error of the fitted model.
    pub residual_standard_error: Option<f64>,
    /// Root mean squared error of the held-out predictions.
    pub prediction_rmse: Option<f64>,
    pub spearman_rho: Option<f64>,
    pub spearman_p: Option<f64>,
    pub within_one_decile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEvalSummary {
    pub feature_names: Vec<String>,
    pub evaluated_epochs: usize,
    pub n_evaluated: usize,
    pub n_skipped: usize,
    pub mean_residual_standard_error: Option<f64>,
    pub mean_prediction_rmse: Option<f64>,
    pub mean_spearman_rho: Option<f64>,
    pub mean_spearman_p: Option<f64>,
    pub mean_within_one_decile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub outcomes: Vec<OutcomeRow>,
    pub trained: Vec<TrainedRow>,
    pub correlations: Vec<CorrelationRow>,
    pub model_eval: Vec<RepetitionEval>,
    pub model_eval_summary: ModelEvalSummary,
}

/// Fraction of positions whose deciles differ by at most one.
pub fn decile_agreement(predicted: &[u8], observed: &[u8]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::DimensionMismatch {
            context: "decile_agreement",
            expected: observed.len(),
            actual: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Size("no deciles to compare".into()));
    }
    let hits = predicted
        .iter()
        .zip(observed)
        .filter(|(p, o)| (**p as i32 - **o as i32).abs() <= 1)
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Picks up to `per_decile` members of every decile, uniformly without
/// replacement. Returned indices refer to `deciles` and are sorted.
pub fn stratified_selection(deciles: &[u8], per_decile: usize, seed_base: u64) -> Vec<usize> {
    let mut chosen = Vec::new();
    for d in 1..=10u8 {
        let mut members: Vec<usize> = (0..deciles.len()).filter(|&i| deciles[i] == d).collect();
        let mut rng = seed::rng(seed::derive(&[seed_base, seed::TAG_SELECT, d as u64]));
        members.shuffle(&mut rng);
        chosen.extend(members.into_iter().take(per_decile));
    }
    chosen.sort_unstable();
    chosen
}

/// Correlation of `maes` with each column of `rows`.
pub fn correlation_row(epochs: usize, rows: &[TrainedRow], maes: &[f64]) -> CorrelationRow {
    let col = |f: fn(&TrainedRow) -> f64| -> Option<f64> {
        let x: Vec<f64> = rows.iter().map(f).collect();
        pearson(&x, maes).ok()
    };
    CorrelationRow {
        epochs,
        nc: col(|r| r.nc as f64),
        lb: col(|r| r.lb as f64),
        mean_fit: col(|r| r.mean_fit),
        sd_fit: col(|r| r.sd_fit),
        log_p_t: col(|r| r.log_p_t),
    }
}

fn evaluate_repetition(
    rep: usize,
    plan: &ExperimentPlan,
    features: &[Vec<f64>],
    observed: &[f64],
) -> RepetitionEval {
    let n = observed.len();
    let n_fit = ((plan.fit_fraction * n as f64).round() as usize).min(n);
    let n_test = n - n_fit;
    let mut eval = RepetitionEval {
        repetition: rep,
        skipped: None,
        n_fit,
        n_test,
        coefficients: Vec::new(),
        residual_standard_error: None,
        prediction_rmse: None,
        spearman_rho: None,
        spearman_p: None,
        within_one_decile: None,
    };
    if n_test < 4 {
        eval.skipped = Some(format!(
            "test partition has {n_test} architectures; at least 4 are needed"
        ));
        return eval;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(seed::derive(&[plan.seed, seed::TAG_REPEAT, rep as u64])));
    let (fit_idx, test_idx) = idx.split_at(n_fit);

    let fit_rows: Vec<Vec<f64>> = fit_idx.iter().map(|&i| features[i].clone()).collect();
    let fit_y: Vec<f64> = fit_idx.iter().map(|&i| observed[i]).collect();
    let model = match ols_fit(&fit_rows, &fit_y, plan.feature_set.names()) {
        Ok(m) => m,
        Err(e) => {
            eval.skipped = Some(format!("linear fit failed: {e}"));
            return eval;
        }
    };
    let test_rows: Vec<Vec<f64>> = test_idx.iter().map(|&i| features[i].clone()).collect();
    let predicted = ols_predict(&model, &test_rows).expect("widths match the fit");
    let obs: Vec<f64> = test_idx.iter().map(|&i| observed[i]).collect();

    eval.coefficients = model.coefficients.clone();
    eval.residual_standard_error = Some(model.residual_standard_error);
    let sq: f64 = predicted.iter().zip(&obs).map(|(p, o)| (p - o).powi(2)).sum();
    eval.prediction_rmse = Some((sq / n_test as f64).sqrt());

    // Both sides are ranked into deciles within the held-out architectures.
    let obs_dec = assign_deciles(&obs, false);
    let pred_dec = assign_deciles(&predicted, false);
    eval.within_one_decile = decile_agreement(&pred_dec, &obs_dec).ok();
    let to_f = |d: &[u8]| d.iter().map(|&v| v as f64).collect::<Vec<_>>();
    match spearman(&to_f(&pred_dec), &to_f(&obs_dec)) {
        Ok(s) => {
            eval.spearman_rho = Some(s.rho);
            eval.spearman_p = Some(s.p_value);
        }
        Err(e) => {
            eval.skipped = Some(format!("spearman undefined: {e}"));
        }
    }
    eval
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Runs the whole pipeline on `series`. Every architecture in the grid must
/// match the series' input and target widths.
pub fn run_experiment(plan: &ExperimentPlan, series: &TimeSeries) -> Result<ExperimentReport> {
    plan.validate()?;

    let mut splits: BTreeMap<usize, Splits> = BTreeMap::new();
    for a in &plan.grid {
        if let std::collections::btree_map::Entry::Vacant(e) = splits.entry(a.lb) {
            e.insert(Splits::new(&window(series, a.lb)?, plan.split_fraction)?);
        }
    }

    let mut outcomes = Vec::with_capacity(plan.grid.len());
    for (id, arch) in plan.grid.iter().enumerate() {
        let mut o = mae_random_sampling(arch, &splits[&arch.lb], &plan.sampling)?;
        o.arch_id = id;
        log::info!(
            "sampled {}/{}: nc={} lb={} log p={:.3}",
            id + 1,
            plan.grid.len(),
            arch.nc,
            arch.lb,
            o.log_p_t
        );
        outcomes.push(o);
    }
    let ranking = rank_architectures(&outcomes)?;
    let mut deciles = vec![0u8; outcomes.len()];
    let mut outcome_rows = Vec::with_capacity(outcomes.len());
    for r in &ranking {
        let o = &outcomes[r.index];
        deciles[r.index] = r.decile;
        outcome_rows.push(OutcomeRow {
            rank: r.rank,
            decile: r.decile,
            arch_id: o.arch_id,
            nc: o.arch.nc,
            lb: o.arch.lb,
            n_samples: o.maes.len(),
            mean_fit: o.fit.mu,
            sd_fit: o.fit.sigma,
            fit_converged: o.fit.converged,
            p_t: o.p_t,
            log_p_t: o.log_p_t,
            best_mae: o.best_mae,
            mean_raw: o.mean_raw,
            sd_raw: o.sd_raw,
        });
    }

    let selected = stratified_selection(&deciles, plan.per_decile, plan.seed);
    let epochs = plan.final_epochs();
    let runs = selected
        .par_iter()
        .map(|&i| {
            let o = &outcomes[i];
            let s = &splits[&o.arch.lb];
            let cfg = AdamConfig {
                epochs,
                seed: seed::derive(&[plan.training.seed, seed::TAG_TRAIN_RUN, o.arch_id as u64]),
                ..plan.training
            };
            let init = if plan.warm_start {
                Init::Weights(o.best_weights())
            } else {
                Init::Fresh
            };
            let run = train_with_checkpoints(&o.arch, &s.train, &s.test, &cfg, init, &plan.epoch_budgets)?;
            log::info!("trained nc={} lb={}: test MAE {:.4}", o.arch.nc, o.arch.lb, run.test_mae);
            Ok(TrainedRow {
                arch_id: o.arch_id,
                nc: o.arch.nc,
                lb: o.arch.lb,
                decile: deciles[i],
                mean_fit: o.fit.mu,
                sd_fit: o.fit.sigma,
                p_t: o.p_t,
                log_p_t: o.log_p_t,
                initial_test_mae: run.initial_test_mae,
                final_train_mae: run
                    .train_mae_history
                    .last()
                    .copied()
                    .unwrap_or(run.initial_train_mae),
                test_mae: run.checkpoints,
            })
        })
        .collect::<Result<Vec<TrainedRow>>>()?;

    let mut budgets = plan.epoch_budgets.clone();
    budgets.sort_unstable();
    budgets.dedup();
    let correlations = budgets
        .iter()
        .map(|&e| {
            let maes: Vec<f64> = runs.iter().map(|r| r.mae_at(e).unwrap_or(f64::NAN)).collect();
            correlation_row(e, &runs, &maes)
        })
        .collect();

    let observed: Vec<f64> = runs.iter().map(|r| r.mae_at(epochs).unwrap_or(f64::NAN)).collect();
    let features: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| plan.feature_set.row(&outcomes[r.arch_id]))
        .collect();
    let model_eval: Vec<RepetitionEval> = (0..plan.repetitions)
        .map(|rep| evaluate_repetition(rep, plan, &features, &observed))
        .collect();
    let used = || model_eval.iter().filter(|e| e.skipped.is_none());
    let model_eval_summary = ModelEvalSummary {
        feature_names: plan.feature_set.names().iter().map(|s| s.to_string()).collect(),
        evaluated_epochs: epochs,
        n_evaluated: used().count(),
        n_skipped: model_eval.len() - used().count(),
        mean_residual_standard_error: mean_of(used().map(|e| e.residual_standard_error)),
        mean_prediction_rmse: mean_of(used().map(|e| e.prediction_rmse)),
        mean_spearman_rho: mean_of(used().map(|e| e.spearman_rho)),
        mean_spearman_p: mean_of(used().map(|e| e.spearman_p)),
        mean_within_one_decile: mean_of(used().map(|e| e.within_one_decile)),
    };

    Ok(ExperimentReport {
        plan: plan.clone(),
        outcomes: outcome_rows,
        trained: runs,
        correlations,
        model_eval,
        model_eval_summary,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_outcomes_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "arch_id", "nc", "lb", "n_samples", "mean_fit", "sd_fit", "p_t", "log_p_t", "best_mae",
            "mean_raw", "sd_raw", "rank", "decile", "fit_converged",
        ])?;
        for r in &self.outcomes {
            w.write_record([
                r.arch_id.to_string(),
                r.nc.to_string(),
                r.lb.to_string(),
                r.n_samples.to_string(),
                num(r.mean_fit),
                num(r.sd_fit),
                num(r.p_t),
                num(r.log_p_t),
                num(r.best_mae),
                num(r.mean_raw),
                num(r.sd_raw),
                r.rank.to_string(),
                r.decile.to_string(),
                r.fit_converged.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_trained_csv(&self, out: impl Write) -> Result<()> {
        let mut budgets: Vec<usize> = self.plan.epoch_budgets.clone();
        budgets.sort_unstable();
        budgets.dedup();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "arch_id", "nc", "lb", "decile", "mean_fit", "sd_fit", "p_t", "log_p_t",
            "initial_test_mae", "final_train_mae",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(budgets.iter().map(|e| format!("test_mae_{e}")));
        w.write_record(&header)?;
        for r in &self.trained {
            let mut rec = vec![
                r.arch_id.to_string(),
                r.nc.to_string(),
                r.lb.to_string(),
                r.decile.to_string(),
                num(r.mean_fit),
                num(r.sd_fit),
                num(r.p_t),
                num(r.log_p_t),
                num(r.initial_test_mae),
                num(r.final_train_mae),
            ];
            rec.extend(budgets.iter().map(|&e| opt(r.mae_at(e))));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_model_eval_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "repetition", "skipped", "n_fit", "n_test", "residual_standard_error",
            "prediction_rmse", "spearman_rho", "spearman_p", "within_one_decile",
        ])?;
        for e in &self.model_eval {
            w.write_record([
                e.repetition.to_string(),
                e.skipped.clone().unwrap_or_default(),
                e.n_fit.to_string(),
                e.n_test.to_string(),
                opt(e.residual_standard_error),
                opt(e.prediction_rmse),
                opt(e.spearman_rho),
                opt(e.spearman_p),
                opt(e.within_one_decile),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Writes `report.json`, `outcomes.csv`, `trained.csv` and
    /// `model_eval.csv` into `dir`, returning the paths.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let report = dir.join("report.json");
        std::fs::write(&report, self.to_json()?).map_err(io(&report))?;
        let mut paths = vec![report];
        type Writer = fn(&ExperimentReport, std::fs::File) -> Result<()>;
        let tables: [(&str, Writer); 3] = [
            ("outcomes.csv", |r, f| r.write_outcomes_csv(f)),
            ("trained.csv", |r, f| r.write_trained_csv(f)),
            ("model_eval.csv", |r, f| r.write_model_eval_csv(f)),
        ];
        for (name, write) in tables {
            let path = dir.join(name);
            let file = std::fs::File::create(&path).map_err(io(&path))?;
            write(self, file)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Where an experiment's series comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Sine(SineParams),
    Csv {
        path: PathBuf,
        #[serde(default)]
        targets: Vec<String>,
    },
}

impl DataSource {
    /// Loads the series; relative CSV paths resolve against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<TimeSeries> {
        match self {
            Self::Sine(p) => generate_sine(p),
            Self::Csv { path, targets } => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                load_csv(&path, targets)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nc: String,
    pub lb: String,
}

fn default_split() -> f64 {
    0.8
}
fn default_per_decile() -> usize {
    10
}
fn default_repetitions() -> usize {
    30
}

/// On-disk experiment plan. All seeds derive from the top-level `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub seed: u64,
    pub data: DataSource,
    #[serde(default)]
    pub minmax: bool,
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    #[serde(default)]
    pub activation: Option<OutputActivation>,
    pub grid: GridSpec,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub training: AdamConfig,
    #[serde(default)]
    pub epoch_budgets: Option<Vec<usize>>,
    #[serde(default = "default_per_decile")]
    pub per_decile: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_split")]
    pub fit_fraction: f64,
    #[serde(default)]
    pub feature_set: FeatureSet,
    #[serde(default)]
    pub warm_start: bool,
}

impl PlanFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Loads the data and expands the plan. Scaled (min-max) data defaults
    /// to a sigmoid output, raw data to tanh.
    pub fn resolve(&self, base: Option<&Path>) -> Result<(ExperimentPlan, TimeSeries)> {
        let mut series = self.data.load(base)?;
        if self.minmax {
            series = minmax_scale(&series).0;
        }
        let act = self.activation.unwrap_or(if self.minmax {
            OutputActivation::Sigmoid
        } else {
            OutputActivation::Tanh
        });
        let ncs = parse_grid(&self.grid.nc).map_err(|e| rename(e, "grid.nc"))?;
        let lbs = parse_grid(&self.grid.lb).map_err(|e| rename(e, "grid.lb"))?;
        let grid = build_grid(&ncs, &lbs, series.n_cols(), series.target_columns().len(), act)?;
        let plan = ExperimentPlan {
            seed: self.seed,
            grid_label: format!(
                "{} grid: nc in {{{}}}, lb in {{{}}}, {act} output",
                if lbs.len() > 1 { "2-D" } else { "1-D" },
                self.grid.nc,
                self.grid.lb
            ),
            grid,
            split_fraction: self.split_fraction,
            sampling: SamplingConfig {
                seed: seed::derive(&[self.seed, seed::TAG_SAMPLE]),
                ..self.sampling
            },
            training: AdamConfig {
                seed: seed::derive(&[self.seed, seed::TAG_TRAIN_RUN]),
                ..self.training
            },
            epoch_budgets: self
                .epoch_budgets
                .clone()
                .unwrap_or_else(|| vec![self.training.epochs]),
            per_decile: self.per_decile,
            repetitions: self.repetitions,
            fit_fraction: self.fit_fraction,
            feature_set: self.feature_set,
            warm_start: self.warm_start,
        };
        plan.validate()?;
        Ok((plan, series))
    }
}

fn rename(e: Error, name: &'static str) -> Error {
    match e {
        Error::InvalidParameter { reason, .. } => Error::InvalidParameter { name, reason },
        other => other,
    }
}
