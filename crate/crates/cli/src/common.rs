//! Flags, data loading, seed-parallel execution and the per-seed training
//! job shared by the training experiments.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use phasegrad_core::data::{self, Dataset, Sample, Task};
use phasegrad_core::graph::CouplingGraph;
use phasegrad_core::init::{self, SeedSpec};
use phasegrad_core::learning::{self, Model, TargetScheme, TrainConfig, TrainMode};
use phasegrad_core::rng;

/// Samples per class drawn by the synthetic generator.
pub const SYNTHETIC_PER_CLASS: usize = 138;
pub const TRAIN_FRACTION: f64 = 0.8;
pub const INIT_SIGMA: f64 = 0.3;
pub const SUCCESS_TEST_ACC: f64 = 0.60;

#[derive(Args, Clone, Debug)]
pub struct CommonArgs {
    /// Seed count `N` (seeds 0..N), a range `a..b`, or a list `1,5,9`.
    #[arg(long)]
    pub seeds: Option<SeedList>,
    /// Result JSON path; a CSV extract is written next to it. Prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Formant CSV path, or `synthetic`.
    #[arg(long, env = "PHASEGRAD_DATA", default_value = "synthetic")]
    pub data: String,
    /// Parallel seed workers (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Samples per class drawn when `--data synthetic`.
    #[arg(long, default_value_t = SYNTHETIC_PER_CLASS)]
    pub synthetic_per_class: usize,
    /// Generator seed for `--data synthetic`.
    #[arg(long, default_value_t = 0)]
    pub synthetic_seed: u64,
}

impl CommonArgs {
    pub fn seeds_or(&self, default_count: u64) -> Vec<u64> {
        self.seeds.clone().map_or_else(|| (0..default_count).collect(), |s| s.0)
    }

    pub fn data_source(&self) -> DataSource {
        DataSource::parse(&self.data, self.synthetic_per_class, self.synthetic_seed)
    }
}

impl Default for CommonArgs {
    fn default() -> Self {
        Self {
            seeds: None,
            out: None,
            data: "synthetic".into(),
            jobs: None,
            synthetic_per_class: SYNTHETIC_PER_CLASS,
            synthetic_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedList(pub Vec<u64>);

impl std::str::FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("invalid seed {t:?}"));
        let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b)?);
            if a >= b {
                return Err(format!("empty seed range {s}"));
            }
            (a..b).collect()
        } else if s.contains(',') {
            s.split(',').map(num).collect::<std::result::Result<_, _>>()?
        } else {
            (0..num(s)?).collect()
        };
        if seeds.is_empty() {
            return Err("no seeds selected".into());
        }
        Ok(Self(seeds))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Synthetic { per_class: usize, seed: u64 },
    Csv { path: PathBuf },
}

impl DataSource {
    pub fn parse(s: &str, per_class: usize, seed: u64) -> Self {
        if s.eq_ignore_ascii_case("synthetic") {
            Self::Synthetic { per_class, seed }
        } else {
            Self::Csv { path: PathBuf::from(s) }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Synthetic { .. } => "synthetic",
            Self::Csv { .. } => "csv",
        }
    }

    pub fn load(&self, task: &Task) -> Result<Dataset> {
        match self {
            Self::Synthetic { per_class, seed } => {
                let mut r = rng::stream("data", *seed, &format!("synthetic:{task}"));
                Ok(data::synthesize_formants(task, *per_class, &mut r)?)
            }
            Self::Csv { path } => data::load_formant_csv(path, task)
                .with_context(|| format!("loading {} for task {task}", path.display())),
        }
    }
}

/// Runs `f` over `seeds` on `jobs` workers; results come back in seed order.
pub fn run_seeds<T, F>(seeds: &[u64], jobs: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| seeds.par_iter().map(|&s| f(s)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Random,
    Spectral,
    OutputOnly,
    /// Best of this many random draws by initial output separation.
    MultiStart(usize),
}

impl std::str::FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "random" => Ok(Self::Random),
            "spectral" => Ok(Self::Spectral),
            "output-only" => Ok(Self::OutputOnly),
            "multi-start" => Ok(Self::MultiStart(10)),
            s => match s.strip_prefix("multi-start:") {
                Some(n) => n.parse().map(Self::MultiStart).map_err(|_| format!("invalid start count in {s:?}")),
                None => Err(format!("unknown init {s:?} (random|spectral|output-only|multi-start[:n])")),
            },
        }
    }
}

pub fn parse_task(s: &str) -> Result<Task> {
    Ok(Task::parse(s.trim())?)
}

pub fn parse_mode(s: &str) -> Result<TrainMode> {
    Ok(match s.trim() {
        "omega" | "omega-only" => TrainMode::OmegaOnly,
        "k" | "k-only" | "k-full" => TrainMode::KOnly,
        "k-matched" => TrainMode::KMatched(7),
        "joint" => TrainMode::Joint,
        s => match s.strip_prefix("k-matched:") {
            Some(n) => TrainMode::KMatched(n.parse().with_context(|| format!("edge count in {s:?}"))?),
            None => bail!("unknown mode {s:?} (omega|k-only|k-matched[:n]|joint)"),
        },
    })
}

pub fn mode_label(mode: TrainMode) -> String {
    match mode {
        TrainMode::OmegaOnly => "omega-only".into(),
        TrainMode::KOnly => "k-only".into(),
        TrainMode::KMatched(n) => format!("k-matched:{n}"),
        TrainMode::Joint => "joint".into(),
    }
}

pub fn parse_targets(s: &str) -> Result<TargetScheme> {
    Ok(match s.trim() {
        "correct-only" => TargetScheme::CorrectOnly,
        "fixed" => TargetScheme::Fixed,
        "nearest-branch" => TargetScheme::NearestBranch,
        _ => bail!("unknown target scheme {s:?} (correct-only|fixed|nearest-branch)"),
    })
}

/// Training hyperparameters exposed by every training command.
#[derive(Args, Clone, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub clip: f64,
    /// Initial weight on every edge.
    #[arg(long, default_value_t = 3.0)]
    pub k0: f64,
    /// Lower coupling bound for trained edges.
    #[arg(long, default_value_t = 0.01)]
    pub k_floor: f64,
    /// correct-only | fixed | nearest-branch
    #[arg(long, default_value = "correct-only", value_parser = parse_targets)]
    pub targets: TargetScheme,
}

impl Default for TrainArgs {
    fn default() -> Self {
        Self { lr: 1e-3, beta: 0.1, clip: 2.0, k0: 3.0, k_floor: 0.01, targets: TargetScheme::CorrectOnly }
    }
}

impl TrainArgs {
    pub fn config(&self, mode: TrainMode, epochs: usize) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            mode,
            lr: self.lr,
            epochs,
            beta: self.beta,
            clip: self.clip,
            k_bounds: (self.k_floor, 8.0),
            targets: self.targets,
            track_condition: false,
            ..TrainConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One seed's training setup, minus the seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainJob {
    pub hidden: usize,
    pub k0: f64,
    pub init: InitKind,
    pub cfg: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub converged: bool,
    /// Final test accuracy above [`SUCCESS_TEST_ACC`].
    pub success: bool,
    pub init_train_acc: f64,
    pub init_test_acc: f64,
    pub final_train_acc: f64,
    pub final_test_acc: f64,
    pub skips: usize,
    /// Mean and spread of `cond(J̃)` over the training samples.
    pub init_cond: Option<f64>,
    pub init_cond_std: Option<f64>,
    pub final_cond: Option<f64>,
    pub final_cond_std: Option<f64>,
    pub final_residual: f64,
    /// `ω_out1 − ω_out2` at initialization.
    pub init_output_split: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Curve>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub train_acc: Vec<f64>,
    pub test_acc: Vec<f64>,
    pub cond: Vec<Option<f64>>,
    pub skips: Vec<usize>,
}

/// Prepared split for one seed.
pub struct SeedData {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// The train/test split every command uses for `seed`.
pub fn seed_data_split(ds: &Dataset, seed: u64) -> Result<data::Split> {
    Ok(data::split_and_normalize(ds, TRAIN_FRACTION, &mut rng::stream("train", seed, "split"))?)
}

pub fn seed_data(ds: &Dataset, seed: u64) -> Result<SeedData> {
    let split = seed_data_split(ds, seed)?;
    Ok(SeedData { train: split.train_samples(ds), test: split.test_samples(ds) })
}

pub fn initial_omega(g: &CouplingGraph, init: InitKind, seed: u64) -> Result<Vec<f64>> {
    Ok(match init {
        InitKind::Random => init::random_init(g, INIT_SIGMA, &mut rng::stream("train", seed, "init"))?,
        InitKind::Spectral => init::spectral_seed(g, &SeedSpec::for_graph(g)?)?,
        InitKind::OutputOnly => init::output_only_init(g, init::DEFAULT_ALPHA_MAX)?,
        InitKind::MultiStart(n) => {
            init::multi_start_screen(g, n, INIT_SIGMA, &mut rng::stream("train", seed, "init"))?.omega
        }
    })
}

type CacheKey = (String, u64, bool);

fn cache() -> &'static Mutex<HashMap<CacheKey, SeedRun>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, SeedRun>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Drops every memoized run.
pub fn clear_cache() {
    cache().lock().expect("cache lock").clear();
}

/// Trains one seed. Results are memoized per process on the full job
/// description, so experiments that share runs compute them once.
pub fn train_seed(source: &DataSource, ds: &Dataset, job: &TrainJob, seed: u64, with_curve: bool) -> Result<SeedRun> {
    let key = (serde_json::to_string(&(source, &ds.task, job))?, seed, with_curve);
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let run = train_seed_uncached(ds, job, seed, with_curve)?;
    cache().lock().expect("cache lock").insert(key, run.clone());
    Ok(run)
}

/// Trains `job` for every seed, in seed order.
pub fn train_arm(
    source: &DataSource,
    ds: &Dataset,
    job: &TrainJob,
    seeds: &[u64],
    jobs: Option<usize>,
    with_curve: bool,
) -> Result<Vec<SeedRun>> {
    run_seeds(seeds, jobs, |s| train_seed(source, ds, job, s, with_curve))
}

fn train_seed_uncached(ds: &Dataset, job: &TrainJob, seed: u64, with_curve: bool) -> Result<SeedRun> {
    let sd = seed_data(ds, seed)?;
    let g = CouplingGraph::layered(2, job.hidden, 2, job.k0)?;
    let omega = initial_omega(&g, job.init, seed)?;
    let outs = g.output_nodes().to_vec();
    let split = omega[outs[0]] - omega[outs[1]];
    let model = Model::new(g, omega, job.cfg.mode, &mut rng::stream("train", seed, "edges"))?;
    let cfg = TrainConfig { seed, ..job.cfg };
    let trace = learning::train(model, &sd.train, &sd.test, &cfg)?;
    let first = trace.epochs[0];
    let last = *trace.last();
    let curve = with_curve.then(|| Curve {
        train_acc: trace.epochs.iter().map(|e| e.train_acc).collect(),
        test_acc: trace.epochs.iter().map(|e| e.test_acc).collect(),
        cond: trace.epochs.iter().map(|e| e.mean_cond).collect(),
        skips: trace.epochs.iter().map(|e| e.skips).collect(),
    });
    Ok(SeedRun {
        seed,
        converged: trace.converged,
        success: last.test_acc > SUCCESS_TEST_ACC,
        init_train_acc: first.train_acc,
        init_test_acc: first.test_acc,
        final_train_acc: last.train_acc,
        final_test_acc: last.test_acc,
        skips: trace.total_skips(),
        init_cond: first.mean_cond,
        init_cond_std: first.std_cond,
        final_cond: last.mean_cond,
        final_cond_std: last.std_cond,
        final_residual: last.mean_residual,
        init_output_split: split,
        curve,
    })
}

pub fn outcomes(runs: &[SeedRun]) -> Vec<phasegrad_core::stats::SeedOutcome> {
    runs.iter()
        .map(|r| phasegrad_core::stats::SeedOutcome {
            final_train_acc: r.final_train_acc,
            final_test_acc: r.final_test_acc,
        })
        .collect()
}
