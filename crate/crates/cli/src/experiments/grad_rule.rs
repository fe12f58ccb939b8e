//! Paired training with the two-phase readout and with finite-difference
//! gradients on identical seeds.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::data::Task;
use phasegrad_core::learning::{GradientRule, TrainConfig, TrainMode};
use phasegrad_core::stats::{mean, std_dev};

use crate::common::{parse_task, train_arm, CommonArgs, DataSource, InitKind, SeedRun, TrainArgs, TrainJob};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "grad-rule")]
pub struct GradRuleArgs {
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
    /// Central-difference step of the finite-difference rule.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    /// Also run both rules at lr = 0, where the gap must vanish.
    #[arg(long)]
    pub control: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradRuleConfig {
    pub task: Task,
    pub seeds: Vec<u64>,
    pub data: DataSource,
    pub two_phase: TrainJob,
    pub finite_difference: TrainJob,
    pub control: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradRuleRecord {
    pub seed: u64,
    pub two_phase: SeedRun,
    pub finite_difference: SeedRun,
    /// Two-phase minus finite-difference final test accuracy, in points.
    pub gap_points: f64,
    pub control_gap_points: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradRuleSummary {
    pub mean_abs_gap_points: f64,
    pub std_abs_gap_points: f64,
    pub max_abs_gap_points: f64,
    pub zero_gap_seeds: usize,
    pub control_max_abs_gap_points: Option<f64>,
}

pub type GradRuleReport = Report<GradRuleConfig, GradRuleRecord, GradRuleSummary>;

pub fn run(args: &GradRuleArgs) -> Result<GradRuleReport> {
    let task = args.task.clone();
    let source = args.common.data_source();
    let ds = source.load(&task)?;
    let seeds = args.common.seeds_or(10);
    let base = args.train.config(TrainMode::OmegaOnly, args.epochs)?;
    let job = |cfg: TrainConfig| TrainJob { hidden: args.hidden, k0: args.train.k0, init: InitKind::Random, cfg };
    let tp_job = job(TrainConfig { rule: GradientRule::TwoPhase, ..base });
    let fd_job = job(TrainConfig { rule: GradientRule::FiniteDifference { h: args.h }, ..base });
    let tp = train_arm(&source, &ds, &tp_job, &seeds, args.common.jobs, false)?;
    let fd = train_arm(&source, &ds, &fd_job, &seeds, args.common.jobs, false)?;
    let control: Option<Vec<f64>> = if args.control {
        let still = |j: &TrainJob| TrainJob { cfg: TrainConfig { lr: 0.0, ..j.cfg }, ..j.clone() };
        let a = train_arm(&source, &ds, &still(&tp_job), &seeds, args.common.jobs, false)?;
        let b = train_arm(&source, &ds, &still(&fd_job), &seeds, args.common.jobs, false)?;
        Some(a.iter().zip(&b).map(|(x, y)| 100.0 * (x.final_test_acc - y.final_test_acc)).collect())
    } else {
        None
    };
    let records: Vec<GradRuleRecord> = tp
        .into_iter()
        .zip(fd)
        .enumerate()
        .map(|(i, (a, b))| GradRuleRecord {
            seed: a.seed,
            gap_points: 100.0 * (a.final_test_acc - b.final_test_acc),
            control_gap_points: control.as_ref().map(|c| c[i]),
            two_phase: a,
            finite_difference: b,
        })
        .collect();
    let abs: Vec<f64> = records.iter().map(|r| r.gap_points.abs()).collect();
    let summary = GradRuleSummary {
        mean_abs_gap_points: mean(&abs),
        std_abs_gap_points: std_dev(&abs),
        max_abs_gap_points: abs.iter().copied().fold(0.0, f64::max),
        zero_gap_seeds: abs.iter().filter(|&&g| g == 0.0).count(),
        control_max_abs_gap_points: control.map(|c| c.iter().map(|g| g.abs()).fold(0.0, f64::max)),
    };
    Ok(Report {
        config: GradRuleConfig {
            task,
            seeds,
            data: source,
            two_phase: tp_job,
            finite_difference: fd_job,
            control: args.control,
        },
        records,
        summary,
    })
}
