//! Command-line experiment runner.
//!
//! `train` resolves a [`RunConfig`] from four layers, highest first:
//! command-line flags, `DIFFQAS_<KEY>` environment variables (for example
//! `DIFFQAS_LR`, `DIFFQAS_ROLLOUT_LEN`), a TOML file given by `--config` or
//! `DIFFQAS_CONFIG`, and built-in defaults. Keys in the file use the long
//! flag names with `-` replaced by `_`.
//!
//! A run writes into the output directory:
//! `metrics.csv` (one row per episode), `weights.csv` (structural weights
//! every `weight_interval` episodes and at the end), `checkpoint.json`,
//! `config.toml` (the resolved configuration) and `summary.toml`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::a3c::{self, EpisodeRecord, Flow, GlobalStore, TrainConfig};
use crate::ansatz::CircuitDescriptor;
use crate::env::EnvName;
use crate::error::{Error, Result};
use crate::model::{ActorCritic, BodyKind, Checkpoint, SegmentKind};

pub const ENV_PREFIX: &str = "DIFFQAS_";
pub const METRICS_HEADER: [&str; 7] = [
    "episode_index",
    "worker_id",
    "score",
    "steps",
    "rolling_mean",
    "rolling_std",
    "wall_clock_seconds",
];
pub const WEIGHTS_HEADER: [&str; 5] = ["episode_index", "block", "candidate_index", "descriptor", "weight"];

#[derive(Debug, Parser)]
#[command(name = "diffqas", version, about = "Quantum architecture search with asynchronous actor-critic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an agent and write metrics, weights and a checkpoint.
    Train(Box<ConfigLayer>),
    /// Print the ranked candidate table stored in a checkpoint.
    Report {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

/// One layer of configuration. Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// Environment, e.g. Empty-5x5 or SimpleCrossing-S9N1.
    #[arg(long)]
    pub env: Option<EnvName>,
    /// `diffqas` or `baseline-K` with K in 1..=6.
    #[arg(long)]
    pub mode: Option<BodyKind>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Episode budget shared by all workers.
    #[arg(long)]
    pub episodes: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub rollout_len: Option<usize>,
    /// Number of stacked ensemble blocks.
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub value_coef: Option<f64>,
    #[arg(long)]
    pub entropy_coef: Option<f64>,
    /// Rolling-statistics window in episodes.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub adam_eps: Option<f64>,
    /// Stop after this many optimiser updates even if episodes remain.
    #[arg(long)]
    pub max_updates: Option<u64>,
    /// Flush metrics every N rows.
    #[arg(long)]
    pub flush_interval: Option<usize>,
    /// Log structural weights every N episodes.
    #[arg(long)]
    pub weight_interval: Option<u64>,
    /// TOML file with any of the keys above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! with_config_fields {
    ($m:ident ! ($($pre:tt)*)) => {
        $m!($($pre)* env, mode, workers, episodes, seed, out, lr, gamma, rollout_len, blocks,
            value_coef, entropy_coef, window, qubits, layers, beta1, beta2, adam_eps,
            max_updates, flush_interval, weight_interval)
    };
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

macro_rules! env_fields {
    ($layer:ident, $lookup:ident, $($f:ident),*) => {
        $(
            let key = format!("{ENV_PREFIX}{}", stringify!($f).to_uppercase());
            if let Some(raw) = $lookup(&key) {
                $layer.$f = Some(raw.parse().map_err(|e| {
                    Error::Usage(format!("invalid value `{raw}` in {key}: {e}"))
                })?);
            }
        )*
    };
}

impl ConfigLayer {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ConfigLayer) -> Self {
        let dst = &mut self;
        with_config_fields!(overlay_fields!(dst, top,));
        self
    }

    pub fn from_env(lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        with_config_fields!(env_fields!(layer, lookup,));
        layer.config = lookup(&format!("{ENV_PREFIX}CONFIG")).map(PathBuf::from);
        Ok(layer)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Usage(format!("config file: {e}")))
    }
}

/// Fully resolved settings for one `train` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvName,
    pub mode: BodyKind,
    pub workers: usize,
    pub episodes: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub lr: f64,
    pub gamma: f64,
    pub rollout_len: usize,
    pub blocks: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub window: usize,
    pub qubits: usize,
    pub layers: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_updates: Option<u64>,
    pub flush_interval: usize,
    pub weight_interval: u64,
}

impl RunConfig {
    /// Defaults for everything but the environment.
    pub fn defaults(env: EnvName) -> Self {
        let t = TrainConfig::new(env);
        Self {
            env,
            mode: t.mode,
            workers: t.workers,
            episodes: t.episodes,
            seed: t.seed,
            out: PathBuf::from("runs/latest"),
            lr: t.lr,
            gamma: t.gamma,
            rollout_len: t.rollout_len,
            blocks: t.blocks,
            value_coef: t.value_coef,
            entropy_coef: t.entropy_coef,
            window: 5000,
            qubits: t.qubits,
            layers: t.layers,
            beta1: t.beta1,
            beta2: t.beta2,
            adam_eps: t.adam_eps,
            max_updates: t.max_updates,
            flush_interval: 100,
            weight_interval: 1000,
        }
    }

    /// Resolves a layer over the defaults; the environment must be set.
    pub fn resolve(layer: &ConfigLayer) -> Result<Self> {
        let env = layer
            .env
            .ok_or_else(|| Error::Usage("an environment is required (--env, DIFFQAS_ENV or `env` in the config file)".into()))?;
        let d = Self::defaults(env);
        let cfg = Self {
            env,
            mode: layer.mode.unwrap_or(d.mode),
            workers: layer.workers.unwrap_or(d.workers),
            episodes: layer.episodes.unwrap_or(d.episodes),
            seed: layer.seed.unwrap_or(d.seed),
            out: layer.out.clone().unwrap_or(d.out),
            lr: layer.lr.unwrap_or(d.lr),
            gamma: layer.gamma.unwrap_or(d.gamma),
            rollout_len: layer.rollout_len.unwrap_or(d.rollout_len),
            blocks: layer.blocks.unwrap_or(d.blocks),
            value_coef: layer.value_coef.unwrap_or(d.value_coef),
            entropy_coef: layer.entropy_coef.unwrap_or(d.entropy_coef),
            window: layer.window.unwrap_or(d.window),
            qubits: layer.qubits.unwrap_or(d.qubits),
            layers: layer.layers.unwrap_or(d.layers),
            beta1: layer.beta1.unwrap_or(d.beta1),
            beta2: layer.beta2.unwrap_or(d.beta2),
            adam_eps: layer.adam_eps.unwrap_or(d.adam_eps),
            max_updates: layer.max_updates.or(d.max_updates),
            flush_interval: layer.flush_interval.unwrap_or(d.flush_interval),
            weight_interval: layer.weight_interval.unwrap_or(d.weight_interval),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("window", self.window as u64),
            ("flush_interval", self.flush_interval as u64),
            ("weight_interval", self.weight_interval),
        ] {
            if v == 0 {
                return Err(Error::Usage(format!("{name} must be at least 1")));
            }
        }
        self.train_config().validate().map_err(|e| match e {
            Error::Config(m) => Error::Usage(m),
            other => other,
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            env: self.env,
            mode: self.mode,
            blocks: self.blocks,
            qubits: self.qubits,
            layers: self.layers,
            workers: self.workers,
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            adam_eps: self.adam_eps,
            gamma: self.gamma,
            rollout_len: self.rollout_len,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
            episodes: self.episodes,
            max_updates: self.max_updates,
            seed: self.seed,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// What the command line asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Train(RunConfig),
    Report { checkpoint: PathBuf },
    /// `--help` or `--version` text.
    Info(String),
}

/// Parses `args` (including the program name), reading environment
/// overrides through `lookup` and the config file from disk.
pub fn parse_config<I, S>(args: I, lookup: impl Fn(&str) -> Option<String>) -> Result<Invocation>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Invocation::Info(e.to_string())),
                _ => Err(Error::Usage(e.to_string())),
            };
        }
    };
    match cli.command {
        Command::Report { checkpoint } => Ok(Invocation::Report { checkpoint }),
        Command::Train(flags) => {
            let env_layer = ConfigLayer::from_env(&lookup)?;
            let file = flags.config.clone().or(env_layer.config.clone());
            let file_layer = match file {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    ConfigLayer::from_toml(&text)?
                }
                None => ConfigLayer::default(),
            };
            let merged = file_layer.overlay(&env_layer).overlay(&flags);
            Ok(Invocation::Train(RunConfig::resolve(&merged)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub episodes: u64,
    pub optimizer_steps: u64,
    pub final_rolling_mean: f64,
    pub final_rolling_std: f64,
    pub wall_time_seconds: f64,
    pub discarded_rollouts: u64,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    results: &'a RunSummary,
    config: &'a RunConfig,
}

/// Structural-weight slices of a flat parameter vector, one per block.
struct WeightLog {
    ranges: Vec<std::ops::Range<usize>>,
    descriptors: Vec<Vec<String>>,
    writer: csv::Writer<BufWriter<File>>,
}

impl WeightLog {
    fn new(path: &Path, model: &ActorCritic) -> Result<Self> {
        let mut ranges: Vec<(usize, std::ops::Range<usize>)> = model
            .param_layout()
            .into_iter()
            .filter(|s| s.kind == SegmentKind::StructuralWeights)
            .map(|s| (s.block.unwrap_or(0), s.range))
            .collect();
        ranges.sort_by_key(|(b, _)| *b);
        let descriptors = model
            .stack()
            .map(|s| {
                s.blocks()
                    .iter()
                    .map(|b| b.descriptors().iter().map(CircuitDescriptor::to_string).collect())
                    .collect()
            })
            .unwrap_or_default();
        let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?));
        writer.write_record(WEIGHTS_HEADER).map_err(|e| csv_error(path, e))?;
        Ok(Self {
            ranges: ranges.into_iter().map(|(_, r)| r).collect(),
            descriptors,
            writer,
        })
    }

    fn log(&mut self, episode: u64, params: &[f64], path: &Path) -> Result<()> {
        for (block, range) in self.ranges.iter().enumerate() {
            for (j, w) in params[range.clone()].iter().enumerate() {
                self.writer
                    .write_record([
                        episode.to_string(),
                        block.to_string(),
                        j.to_string(),
                        self.descriptors[block][j].clone(),
                        w.to_string(),
                    ])
                    .map_err(|e| csv_error(path, e))?;
            }
        }
        self.writer.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// Paths of the files a run writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFiles {
    pub metrics: PathBuf,
    pub weights: PathBuf,
    pub checkpoint: PathBuf,
    pub config: PathBuf,
    pub summary: PathBuf,
}

impl RunFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            metrics: dir.join("metrics.csv"),
            weights: dir.join("weights.csv"),
            checkpoint: dir.join("checkpoint.json"),
            config: dir.join("config.toml"),
            summary: dir.join("summary.toml"),
        }
    }
}

/// Trains according to `cfg` and writes every output file. On a training
/// fault the metrics written so far are flushed before the error returns.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let files = RunFiles::in_dir(&cfg.out);
    fs::write(&files.config, cfg.to_toml()?).map_err(|e| Error::io(&files.config, e))?;

    let train_cfg = cfg.train_config();
    let template = ActorCritic::new(train_cfg.model_config(), &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let mut weights = WeightLog::new(&files.weights, &template)?;
    let metrics_file = File::create(&files.metrics).map_err(|e| Error::io(&files.metrics, e))?;
    let mut metrics = csv::Writer::from_writer(BufWriter::new(metrics_file));
    metrics
        .write_record(METRICS_HEADER)
        .map_err(|e| csv_error(&files.metrics, e))?;

    let start = Instant::now();
    let mut rows = 0usize;
    let mut last = (0.0, 0.0);
    let result = a3c::train_with(&train_cfg, cfg.window, |rec: &EpisodeRecord, stats, store: &GlobalStore| {
        metrics
            .write_record([
                rec.index.to_string(),
                rec.worker_id.to_string(),
                rec.score.to_string(),
                rec.steps.to_string(),
                stats.0.to_string(),
                stats.1.to_string(),
                format!("{:.6}", start.elapsed().as_secs_f64()),
            ])
            .map_err(|e| csv_error(&files.metrics, e))?;
        rows += 1;
        last = stats;
        if rows.is_multiple_of(cfg.flush_interval) {
            metrics.flush().map_err(|e| Error::io(&files.metrics, e))?;
        }
        if rec.index.is_multiple_of(cfg.weight_interval) {
            weights.log(rec.index, &store.params(), &files.weights)?;
        }
        Ok(Flow::Continue)
    });
    metrics.flush().map_err(|e| Error::io(&files.metrics, e))?;
    let outcome = result?;

    weights.log(outcome.checkpoint.episodes, &outcome.checkpoint.params, &files.weights)?;
    outcome.checkpoint.save(&files.checkpoint)?;

    let summary = RunSummary {
        episodes: outcome.log.records.len() as u64,
        optimizer_steps: outcome.optimizer_steps,
        final_rolling_mean: last.0,
        final_rolling_std: last.1,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        discarded_rollouts: outcome.incidents,
    };
    let text = toml::to_string(&SummaryFile {
        results: &summary,
        config: cfg,
    })
    .map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&files.summary, text).map_err(|e| Error::io(&files.summary, e))?;
    Ok(summary)
}

/// One line of the architecture report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub block: usize,
    pub rank: usize,
    pub candidate_index: usize,
    pub descriptor: CircuitDescriptor,
    pub weight: f64,
}

/// Candidates of every block ranked by structural weight. Fixed-circuit
/// checkpoints have no rows.
pub fn report_architecture(checkpoint: &Checkpoint) -> Result<Vec<ReportRow>> {
    let model = checkpoint.to_model()?;
    let Some(stack) = model.stack() else {
        return Ok(Vec::new());
    };
    let mut rows = Vec::new();
    for (block, b) in stack.blocks().iter().enumerate() {
        for (rank, c) in b.top_candidates(b.n_candidates()).into_iter().enumerate() {
            rows.push(ReportRow {
                block,
                rank: rank + 1,
                candidate_index: c.index,
                descriptor: c.descriptor,
                weight: c.weight,
            });
        }
    }
    Ok(rows)
}

pub fn format_report(rows: &[ReportRow]) -> String {
    let mut out = format!("{:>5} {:>4} {:>5}  {:<28} {:>12}\n", "block", "rank", "index", "descriptor", "weight");
    for r in rows {
        out.push_str(&format!(
            "{:>5} {:>4} {:>5}  {:<28} {:>12.6}\n",
            r.block,
            r.rank,
            r.candidate_index,
            r.descriptor.to_string(),
            r.weight
        ));
    }
    out
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with<I, S>(args: I, lookup: impl Fn(&str) -> Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(args, lookup).and_then(|inv| match inv {
        Invocation::Info(text) => {
            let _ = write!(out, "{text}");
            Ok(())
        }
        Invocation::Report { checkpoint } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let rows = report_architecture(&ck)?;
            if rows.is_empty() {
                let _ = writeln!(out, "checkpoint uses a fixed circuit ({}); no candidates to rank", ck.model.body);
            } else {
                let _ = write!(out, "{}", format_report(&rows));
            }
            Ok(())
        }
        Invocation::Train(cfg) => {
            let s = run(&cfg)?;
            let _ = writeln!(
                out,
                "{} episodes, {} updates, rolling mean {:.4} (std {:.4}) in {:.1}s; outputs in {}",
                s.episodes,
                s.optimizer_steps,
                s.final_rolling_mean,
                s.final_rolling_std,
                s.wall_time_seconds,
                cfg.out.display()
            );
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) | Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}
