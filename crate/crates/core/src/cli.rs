//! The `mae-sampling` command line.
//!
//! `sample` and `train` accept `--config file.json` holding any of their
//! flags (snake_case keys); flags given on the command line win. Every
//! artifact records the resolved configuration: `sample` writes a
//! `config.json` next to its tables, `train` embeds it in its JSON, and
//! `gen-data` writes `<out>.json` beside the CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiment::{build_grid, parse_grid, run_experiment, PlanFile};
use crate::rnn::{ArchitectureSpec, OutputActivation, WeightSet};
use crate::sampling::{
    mae_random_sampling, rank_architectures, write_outcomes_csv, write_ranking_csv, EvalSplit,
    SamplingConfig,
};
use crate::timeseries::{generate_sine, load_csv, minmax_scale, window, SineParams, Splits, TimeSeries};
use crate::trainer::{train, AdamConfig, Init};

pub const THREADS_ENV: &str = "MAE_SAMPLING_THREADS";

/// Exit status when some architectures failed but the rest completed.
pub const EXIT_PARTIAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "mae-sampling", version, about = "Rank LSTM architectures by MAE random sampling")]
pub struct Cli {
    /// Worker thread cap; 0 uses every core.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a sampled sine wave as a one-column CSV.
    GenData(GenDataArgs),
    /// Run MAE random sampling over an architecture grid.
    Sample(SampleArgs),
    /// Train one architecture with Adam.
    Train(TrainArgs),
    /// Run a full validation experiment from a plan file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub frequency: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phase: f64,
    /// Samples per second.
    #[arg(long, default_value_t = 10.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    None,
    Minmax,
}

/// Options shared by `sample` and `train` for loading data.
#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Comma-separated target columns; optional for one-column files.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub targets: Option<Vec<String>>,
    #[arg(long, value_enum)]
    #[serde(default)]
    pub scale: Option<Scale>,
    /// Output activation; defaults to sigmoid for min-max scaled data and
    /// tanh otherwise.
    #[arg(long)]
    #[serde(default)]
    pub activation: Option<OutputActivation>,
    /// Fraction of windows used for training (chronological).
    #[arg(long)]
    #[serde(default)]
    pub split: Option<f64>,
}

impl DataArgs {
    fn merge(self, file: Self) -> Self {
        Self {
            data: self.data.or(file.data),
            targets: self.targets.or(file.targets),
            scale: self.scale.or(file.scale),
            activation: self.activation.or(file.activation),
            split: self.split.or(file.split),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ResolvedData {
    data: PathBuf,
    targets: Vec<String>,
    scale: Scale,
    activation: OutputActivation,
    split: f64,
}

impl ResolvedData {
    fn from_args(a: &DataArgs) -> Result<Self> {
        let data = a.data.clone().ok_or_else(|| missing("data"))?;
        let scale = a.scale.unwrap_or_default();
        Ok(Self {
            data,
            targets: a.targets.clone().unwrap_or_default(),
            scale,
            activation: a.activation.unwrap_or(match scale {
                Scale::Minmax => OutputActivation::Sigmoid,
                Scale::None => OutputActivation::Tanh,
            }),
            split: a.split.unwrap_or(0.8),
        })
    }

    fn load(&self) -> Result<TimeSeries> {
        let series = load_csv(&self.data, &self.targets)?;
        Ok(match self.scale {
            Scale::None => series,
            Scale::Minmax => minmax_scale(&series).0,
        })
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Cell counts, e.g. `1..100` or `4,8,16`.
    #[arg(long)]
    #[serde(default)]
    pub nc: Option<String>,
    /// Look-back lengths, same syntax as `--nc`.
    #[arg(long)]
    #[serde(default)]
    pub lb: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub threshold: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    /// Split the sampled MAE is measured on: train, test or full.
    #[arg(long)]
    #[serde(default)]
    pub eval_split: Option<EvalSplit>,
    /// Output directory.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Also write the best sampled weights of every architecture.
    #[arg(long)]
    #[serde(default)]
    pub export_best_weights: bool,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    #[serde(default)]
    pub nc: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub lb: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub epochs: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(default)]
    pub lr: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub clip_norm: Option<f64>,
    /// Start from these weights instead of a fresh initialization; the
    /// architecture is read from the file.
    #[arg(long)]
    #[serde(default)]
    pub init_weights: Option<PathBuf>,
    /// Output JSON path.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Write the trained weights here.
    #[arg(long)]
    #[serde(default)]
    pub export_weights: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Output directory; required unless `--dry-run`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the plan's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the resolved plan and exit without running or writing.
    #[arg(long)]
    pub dry_run: bool,
}

fn missing(flag: &'static str) -> Error {
    Error::InvalidParameter {
        name: flag,
        reason: format!("--{} is required", flag.replace('_', "-")),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.to_path_buf();
    move |source| Error::Io { path, source }
}

/// Reads a JSON config whose keys must be the long flags of `T`, in
/// snake_case.
fn read_config<T: DeserializeOwned + Args>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let known = T::augment_args(clap::Command::new("config"));
    let known: Vec<&str> = known
        .get_arguments()
        .map(|a| a.get_id().as_str())
        .filter(|id| *id != "config")
        .collect();
    if let Some(map) = value.as_object() {
        if let Some(bad) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidParameter {
                name: "config",
                reason: format!("unknown field `{bad}` in {}", path.display()),
            });
        }
    }
    Ok(serde_json::from_value(value)?)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

fn create_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(io_err(path))
}

/// What a successful command reports back.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub written: Vec<PathBuf>,
    /// Architectures that could not be processed, with the reason.
    pub failures: Vec<String>,
}

pub fn gen_data(a: &GenDataArgs) -> Result<Report> {
    let p = SineParams {
        amplitude: a.amplitude,
        frequency: a.frequency,
        phase: a.phase,
        rate: a.rate,
        t_start: a.t_start,
        t_end: a.t_end,
    };
    let series = generate_sine(&p)?;
    series.write_csv(&a.out)?;
    let mut meta = a.out.clone().into_os_string();
    meta.push(".json");
    let meta = PathBuf::from(meta);
    write_json(&meta, &json!({ "command": "gen-data", "sine": p, "rows": series.len() }))?;
    Ok(Report {
        written: vec![a.out.clone(), meta],
        failures: vec![],
    })
}

pub fn sample(args: SampleArgs) -> Result<Report> {
    let args = match &args.config {
        Some(path) => {
            let file: SampleArgs = read_config(path)?;
            SampleArgs {
                data: args.data.clone().merge(file.data),
                nc: args.nc.or(file.nc),
                lb: args.lb.or(file.lb),
                samples: args.samples.or(file.samples),
                threshold: args.threshold.or(file.threshold),
                seed: args.seed.or(file.seed),
                eval_split: args.eval_split.or(file.eval_split),
                out: args.out.or(file.out),
                export_best_weights: args.export_best_weights || file.export_best_weights,
                config: args.config,
            }
        }
        None => args,
    };
    let data = ResolvedData::from_args(&args.data)?;
    let out = args.out.clone().ok_or_else(|| missing("out"))?;
    let nc_text = args.nc.clone().unwrap_or_else(|| "1..100".into());
    let lb_text = args.lb.clone().unwrap_or_else(|| "30".into());
    let cfg = SamplingConfig {
        max_samples: args.samples.unwrap_or(1000),
        threshold: args.threshold.unwrap_or(0.01),
        seed: args.seed.unwrap_or(0),
        eval_split: args.eval_split.unwrap_or_default(),
    };
    cfg.validate()?;
    let ncs = parse_grid(&nc_text)?;
    let lbs = parse_grid(&lb_text)?;

    let series = data.load()?;
    let grid = build_grid(&ncs, &lbs, series.n_cols(), series.target_columns().len(), data.activation)?;
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let weights_dir = out.join("weights");
    if args.export_best_weights {
        std::fs::create_dir_all(&weights_dir).map_err(io_err(&weights_dir))?;
    }

    let mut report = Report::default();
    let mut outcomes = Vec::new();
    for &lb in &lbs {
        let splits = window(&series, lb).and_then(|ds| Splits::new(&ds, data.split));
        for (id, arch) in grid.iter().enumerate().filter(|(_, a)| a.lb == lb) {
            let result = splits
                .as_ref()
                .map_err(|e| Error::Size(e.to_string()))
                .and_then(|s| mae_random_sampling(arch, s, &cfg));
            match result {
                Ok(mut o) => {
                    o.arch_id = id;
                    log::info!("nc={} lb={}: log p = {:.4}", arch.nc, arch.lb, o.log_p_t);
                    if args.export_best_weights {
                        let path = weights_dir.join(format!("best_nc{}_lb{}.w", arch.nc, arch.lb));
                        o.best_weights().save(&path)?;
                        report.written.push(path);
                    }
                    outcomes.push(o);
                }
                Err(e) => {
                    log::warn!("nc={} lb={} failed: {e}", arch.nc, arch.lb);
                    report.failures.push(format!("nc={} lb={}: {e}", arch.nc, arch.lb));
                }
            }
        }
    }
    outcomes.sort_by_key(|o| o.arch_id);

    let outcomes_path = out.join("outcomes.csv");
    write_outcomes_csv(&outcomes, create_file(&outcomes_path)?)?;
    let ranking_path = out.join("ranking.csv");
    if outcomes.is_empty() {
        write_ranking_csv(&[], create_file(&ranking_path)?)?;
    } else {
        write_ranking_csv(&rank_architectures(&outcomes)?, create_file(&ranking_path)?)?;
    }
    let config_path = out.join("config.json");
    write_json(
        &config_path,
        &json!({
            "command": "sample",
            "data": data,
            "nc": nc_text,
            "lb": lb_text,
            "sampling": cfg,
            "export_best_weights": args.export_best_weights,
            "failures": report.failures,
        }),
    )?;
    report.written.splice(0..0, [outcomes_path, ranking_path, config_path]);
    Ok(report)
}

#[derive(Debug, Serialize)]
struct TrainOutput<'a> {
    command: &'static str,
    data: &'a ResolvedData,
    init_weights: Option<&'a Path>,
    summary: crate::trainer::TrainingSummary,
}

pub fn train_cmd(args: TrainArgs) -> Result<Report> {
    let args = match &args.config {
        Some(path) => {
            let file: TrainArgs = read_config(path)?;
            TrainArgs {
                data: args.data.clone().merge(file.data),
                nc: args.nc.or(file.nc),
                lb: args.lb.or(file.lb),
                epochs: args.epochs.or(file.epochs),
                seed: args.seed.or(file.seed),
                lr: args.lr.or(file.lr),
                batch_size: args.batch_size.or(file.batch_size),
                clip_norm: args.clip_norm.or(file.clip_norm),
                init_weights: args.init_weights.or(file.init_weights),
                out: args.out.or(file.out),
                export_weights: args.export_weights.or(file.export_weights),
                config: args.config,
            }
        }
        None => args,
    };
    let mut data = ResolvedData::from_args(&args.data)?;
    let out = args.out.clone().ok_or_else(|| missing("out"))?;
    let series = data.load()?;

    let (arch, init) = match &args.init_weights {
        Some(path) => {
            let w = WeightSet::load(path)?;
            let a = *w.arch();
            for (flag, given, actual) in [("nc", args.nc, a.nc), ("lb", args.lb, a.lb)] {
                if given.is_some_and(|g| g != actual) {
                    return Err(Error::InvalidParameter {
                        name: flag,
                        reason: format!("--{flag} {} conflicts with the weight file ({actual})", given.unwrap()),
                    });
                }
            }
            if args.data.activation.is_some_and(|act| act != a.output_activation) {
                return Err(Error::InvalidParameter {
                    name: "activation",
                    reason: "conflicts with the weight file".into(),
                });
            }
            data.activation = a.output_activation;
            (a, Init::Weights(w))
        }
        None => {
            let nc = args.nc.ok_or_else(|| missing("nc"))?;
            let lb = args.lb.ok_or_else(|| missing("lb"))?;
            let arch = ArchitectureSpec::new(
                nc,
                lb,
                series.n_cols(),
                series.target_columns().len(),
                data.activation,
            )?;
            (arch, Init::Fresh)
        }
    };
    let defaults = AdamConfig::default();
    let cfg = AdamConfig {
        learning_rate: args.lr.unwrap_or(defaults.learning_rate),
        epochs: args.epochs.unwrap_or(defaults.epochs),
        batch_size: args.batch_size.unwrap_or(defaults.batch_size),
        seed: args.seed.unwrap_or(defaults.seed),
        clip_norm: args.clip_norm.or(defaults.clip_norm),
        ..defaults
    };
    let splits = Splits::new(&window(&series, arch.lb)?, data.split)?;
    let run = train(&arch, &splits.train, &splits.test, &cfg, init)?;
    log::info!(
        "nc={} lb={}: test MAE {:.6} -> {:.6}",
        arch.nc,
        arch.lb,
        run.initial_test_mae,
        run.test_mae
    );

    let mut report = Report::default();
    write_json(
        &out,
        &TrainOutput {
            command: "train",
            data: &data,
            init_weights: args.init_weights.as_deref(),
            summary: run.summary(),
        },
    )?;
    report.written.push(out);
    if let Some(path) = &args.export_weights {
        run.final_weights.save(path)?;
        report.written.push(path.clone());
    }
    Ok(report)
}

pub fn experiment(args: &ExperimentArgs) -> Result<Report> {
    let text = std::fs::read_to_string(&args.plan).map_err(io_err(&args.plan))?;
    let mut file = PlanFile::from_json(&text)?;
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    let (plan, series) = file.resolve(args.plan.parent())?;
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&plan)?);
        return Ok(Report::default());
    }
    let out = args.out.clone().ok_or_else(|| missing("out"))?;
    let report = run_experiment(&plan, &series)?;
    Ok(Report {
        written: report.write_all(&out)?,
        failures: vec![],
    })
}

pub fn execute(cli: Cli) -> Result<Report> {
    if cli.threads > 0 {
        // Fails only if a pool already exists, e.g. when called twice in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match cli.command {
        Command::GenData(a) => gen_data(&a),
        Command::Sample(a) => sample(a),
        Command::Train(a) => train_cmd(a),
        Command::Experiment(a) => experiment(&a),
    }
}

/// Parses `std::env::args`, runs the command and maps the result to an
/// exit status: 0 success, 1 error, 2 usage, 3 partial failure.
pub fn run() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(report) => {
            for p in &report.written {
                println!("wrote {}", p.display());
            }
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &report.failures {
                    eprintln!("failed: {f}");
                }
                ExitCode::from(EXIT_PARTIAL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
