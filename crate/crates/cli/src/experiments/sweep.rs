//! Frequency-only against coupling-only training across hidden-layer sizes.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::data::Task;
use phasegrad_core::learning::TrainMode;

use super::{arm_summary, compare, learnable_params, ArmSummary, Comparison};
use crate::common::{
    mode_label, parse_mode, parse_task, train_arm, CommonArgs, DataSource, InitKind, SeedRun, TrainArgs, TrainJob,
};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "sweep")]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = "a-i", value_parser = parse_task)]
    pub task: Task,
    /// Hidden-layer sizes of the 2 + h + 2 networks.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7,10,15")]
    pub hidden: Vec<usize>,
    /// Exactly two modes; the gap is first minus second.
    #[arg(long, value_delimiter = ',', default_value = "omega,k-only", value_parser = parse_mode)]
    pub modes: Vec<TrainMode>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub task: Task,
    pub seeds: Vec<u64>,
    pub data: DataSource,
    pub hidden: Vec<usize>,
    pub jobs: Vec<TrainJob>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub hidden: usize,
    pub mode: String,
    #[serde(flatten)]
    pub run: SeedRun,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub hidden: usize,
    pub n: usize,
    pub params: [usize; 2],
    pub arms: [ArmSummary; 2],
    pub comparison: Comparison,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub sizes: Vec<SizeSummary>,
    /// Every size has a defined, strictly positive gap.
    pub gap_positive_everywhere: bool,
}

pub type SweepReport = Report<SweepConfig, SweepRecord, SweepSummary>;

pub fn run(args: &SweepArgs) -> Result<SweepReport> {
    let task = args.task.clone();
    let source = args.common.data_source();
    let ds = source.load(&task)?;
    let seeds = args.common.seeds_or(50);
    let hidden = args.hidden.clone();
    let modes = &args.modes;
    anyhow::ensure!(modes.len() == 2, "sweep compares exactly two modes, got {}", modes.len());
    let labels = [mode_label(modes[0]), mode_label(modes[1])];
    let mut jobs = Vec::new();
    let mut records = Vec::new();
    let mut sizes = Vec::new();
    for &h in &hidden {
        let mut arms: Vec<Vec<SeedRun>> = Vec::new();
        for &mode in modes {
            let job = TrainJob {
                hidden: h,
                k0: args.train.k0,
                init: InitKind::Random,
                cfg: args.train.config(mode, args.epochs)?,
            };
            let runs = train_arm(&source, &ds, &job, &seeds, args.common.jobs, false)?;
            records.extend(runs.iter().map(|run| SweepRecord { hidden: h, mode: mode_label(mode), run: run.clone() }));
            arms.push(runs);
            jobs.push(job);
        }
        sizes.push(SizeSummary {
            hidden: h,
            n: h + 4,
            params: [learnable_params(h, modes[0]), learnable_params(h, modes[1])],
            arms: [arm_summary(&labels[0], &arms[0]), arm_summary(&labels[1], &arms[1])],
            comparison: compare(&labels[0], &arms[0], &labels[1], &arms[1]),
        });
    }
    let gap_positive_everywhere = sizes.iter().all(|s| s.comparison.gap_points.is_some_and(|g| g > 0.0));
    Ok(Report {
        config: SweepConfig { task, seeds, data: source, hidden, jobs },
        records,
        summary: SweepSummary { sizes, gap_positive_everywhere },
    })
}
