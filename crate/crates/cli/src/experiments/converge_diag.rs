//! Why seeds fail: Jacobian conditioning and solver health for converged
//! versus failed seeds, and whether the converged set changes across
//! training configurations.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::data::Task;
use phasegrad_core::learning::{TrainConfig, TrainMode};
use phasegrad_core::stats::{mean, std_dev, CONVERGENCE_THRESHOLD};

use super::jaccard;
use crate::common::{parse_task, train_arm, CommonArgs, DataSource, InitKind, SeedRun, TrainArgs, TrainJob};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "converge-diag")]
pub struct ConvergeDiagArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = "a-i", value_parser = parse_task)]
    pub task: Task,
    #[arg(long, default_value_t = 150)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub hidden: usize,
    /// Seeds shared by the configuration comparison (0..n).
    #[arg(long, default_value_t = 20)]
    pub config_seeds: u64,
    /// Skip the configuration comparison.
    #[arg(long)]
    pub no_configs: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedJob {
    pub name: String,
    pub job: TrainJob,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeDiagConfig {
    pub task: Task,
    pub data: DataSource,
    pub diagnostic_seeds: Vec<u64>,
    pub diagnostic: TrainJob,
    pub config_seeds: Vec<u64>,
    pub configs: Vec<NamedJob>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagRecord {
    /// `diagnostic`, or the configuration name.
    pub part: String,
    #[serde(flatten)]
    pub run: SeedRun,
}

/// `cond(J̃)` over every (seed, training sample) evaluation of a group.
/// Each seed contributes its whole training split.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondStats {
    pub n: usize,
    pub init_mean: Option<f64>,
    pub init_std: Option<f64>,
    pub final_mean: Option<f64>,
    pub final_std: Option<f64>,
    /// Spread of the per-seed means alone.
    pub init_seed_std: Option<f64>,
    pub final_seed_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigOutcome {
    pub name: String,
    pub converged_seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairOverlap {
    pub a: String,
    pub b: String,
    pub jaccard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergeDiagSummary {
    pub converged: CondStats,
    pub failed: CondStats,
    /// Pooled standard deviation of the per-sample condition numbers.
    pub pooled_sigma_init: Option<f64>,
    pub pooled_sigma_final: Option<f64>,
    /// Converged and failed means differ by at most one pooled sigma.
    pub init_overlap: Option<bool>,
    pub final_overlap: Option<bool>,
    /// Skipped samples over all diagnostic training steps.
    pub skip_rate: f64,
    pub configs: Vec<ConfigOutcome>,
    pub overlaps: Vec<PairOverlap>,
    pub min_jaccard: Option<f64>,
}

pub type ConvergeDiagReport = Report<ConvergeDiagConfig, DiagRecord, ConvergeDiagSummary>;

/// Mean and standard deviation of the mixture of per-seed distributions,
/// plus the spread of the per-seed means.
fn mixture(parts: &[(f64, f64)]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if parts.is_empty() {
        return (None, None, None);
    }
    let means: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let m = mean(&means);
    let var = parts.iter().map(|&(mi, si)| si * si + (mi - m).powi(2)).sum::<f64>() / parts.len() as f64;
    (Some(m), Some(var.sqrt()), (parts.len() >= 2).then(|| std_dev(&means)))
}

fn cond_stats(runs: &[&SeedRun]) -> CondStats {
    let init: Vec<(f64, f64)> = runs.iter().filter_map(|r| Some((r.init_cond?, r.init_cond_std?))).collect();
    let fin: Vec<(f64, f64)> = runs.iter().filter_map(|r| Some((r.final_cond?, r.final_cond_std?))).collect();
    let (init_mean, init_std, init_seed_std) = mixture(&init);
    let (final_mean, final_std, final_seed_std) = mixture(&fin);
    CondStats { n: runs.len(), init_mean, init_std, final_mean, final_std, init_seed_std, final_seed_std }
}

fn pooled(a: (usize, Option<f64>), b: (usize, Option<f64>)) -> Option<f64> {
    let (na, sa) = (a.0 as f64, a.1?);
    let (nb, sb) = (b.0 as f64, b.1?);
    Some(((na * sa * sa + nb * sb * sb) / (na + nb)).sqrt())
}

/// The five configurations: joint baseline, stronger initial coupling,
/// raised coupling floor, frequency recentering, and frequency-only
/// training at the baseline coupling.
pub fn configurations(args: &ConvergeDiagArgs) -> Result<Vec<NamedJob>> {
    let base = args.train.config(TrainMode::Joint, args.epochs)?;
    let job = |name: &str, k0: f64, cfg: TrainConfig| NamedJob {
        name: name.into(),
        job: TrainJob { hidden: args.hidden, k0, init: InitKind::Random, cfg },
    };
    Ok(vec![
        job("baseline", args.train.k0, base),
        job("k0=4", 4.0, base),
        job("k-floor=1.5", args.train.k0, TrainConfig { k_bounds: (1.5, base.k_bounds.1), ..base }),
        job("recenter", args.train.k0, TrainConfig { recenter: true, ..base }),
        job("omega-only", args.train.k0, TrainConfig { mode: TrainMode::OmegaOnly, ..base }),
    ])
}

pub fn run(args: &ConvergeDiagArgs) -> Result<ConvergeDiagReport> {
    let task = args.task.clone();
    let source = args.common.data_source();
    let ds = source.load(&task)?;
    let diagnostic_seeds = args.common.seeds_or(40);
    let diagnostic = TrainJob {
        hidden: args.hidden,
        k0: args.train.k0,
        init: InitKind::Random,
        cfg: TrainConfig { track_condition: true, ..args.train.config(TrainMode::Joint, args.epochs)? },
    };
    let diag = train_arm(&source, &ds, &diagnostic, &diagnostic_seeds, args.common.jobs, true)?;
    let (conv, failed): (Vec<&SeedRun>, Vec<&SeedRun>) =
        diag.iter().partition(|r| r.final_train_acc > CONVERGENCE_THRESHOLD);
    let (c, f) = (cond_stats(&conv), cond_stats(&failed));
    let pooled_sigma_init = pooled((c.n, c.init_std), (f.n, f.init_std));
    let pooled_sigma_final = pooled((c.n, c.final_std), (f.n, f.final_std));
    let within = |a: Option<f64>, b: Option<f64>, s: Option<f64>| Some((a? - b?).abs() <= s?);
    let steps = diag.len() * args.epochs * ((ds.len() as f64 * crate::common::TRAIN_FRACTION).round() as usize);
    let skip_rate = if steps == 0 { 0.0 } else { diag.iter().map(|r| r.skips).sum::<usize>() as f64 / steps as f64 };

    let config_seeds: Vec<u64> = if args.no_configs { Vec::new() } else { (0..args.config_seeds).collect() };
    let configs = if args.no_configs { Vec::new() } else { configurations(args)? };
    let mut records: Vec<DiagRecord> =
        diag.iter().map(|r| DiagRecord { part: "diagnostic".into(), run: r.clone() }).collect();
    let mut outcomes = Vec::new();
    for nj in &configs {
        let runs = train_arm(&source, &ds, &nj.job, &config_seeds, args.common.jobs, false)?;
        outcomes.push(ConfigOutcome {
            name: nj.name.clone(),
            converged_seeds: runs
                .iter()
                .filter(|r| r.final_train_acc > CONVERGENCE_THRESHOLD)
                .map(|r| r.seed)
                .collect(),
        });
        records.extend(runs.into_iter().map(|run| DiagRecord { part: nj.name.clone(), run }));
    }
    let mut overlaps = Vec::new();
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            overlaps.push(PairOverlap {
                a: outcomes[i].name.clone(),
                b: outcomes[j].name.clone(),
                jaccard: jaccard(&outcomes[i].converged_seeds, &outcomes[j].converged_seeds),
            });
        }
    }
    let min_jaccard = overlaps.iter().map(|o| o.jaccard).reduce(f64::min);
    Ok(Report {
        config: ConvergeDiagConfig { task, data: source, diagnostic_seeds, diagnostic, config_seeds, configs },
        records,
        summary: ConvergeDiagSummary {
            init_overlap: within(c.init_mean, f.init_mean, pooled_sigma_init),
            final_overlap: within(c.final_mean, f.final_mean, pooled_sigma_final),
            converged: c,
            failed: f,
            pooled_sigma_init,
            pooled_sigma_final,
            skip_rate,
            configs: outcomes,
            overlaps,
            min_jaccard,
        },
    })
}
