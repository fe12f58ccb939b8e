//! Which parameter set to train: frequencies, couplings (all or a
//! size-matched subset), or both.

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
#[command(name = "ablate")]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = "a-i", value_parser = parse_task)]
    pub task: Task,
    /// Modes to compare; the first is the reference for the tests.
    #[arg(long, value_delimiter = ',', default_value = "omega,k-matched:7,k-full,joint", value_parser = parse_mode)]
    pub modes: Vec<TrainMode>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub hidden: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AblateConfig {
    pub task: Task,
    pub seeds: Vec<u64>,
    pub data: DataSource,
    pub hidden: usize,
    pub jobs: Vec<TrainJob>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblateRecord {
    pub mode: String,
    #[serde(flatten)]
    pub run: SeedRun,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSummary {
    pub params: usize,
    #[serde(flatten)]
    pub arm: ArmSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblateSummary {
    pub modes: Vec<ModeSummary>,
    /// Reference mode against each other mode.
    pub comparisons: Vec<Comparison>,
}

pub type AblateReport = Report<AblateConfig, AblateRecord, AblateSummary>;

pub fn run(args: &AblateArgs) -> Result<AblateReport> {
    let task = args.task.clone();
    let source = args.common.data_source();
    let ds = source.load(&task)?;
    let seeds = args.common.seeds_or(100);
    let modes = &args.modes;
    anyhow::ensure!(!modes.is_empty(), "no modes given");
    let jobs = modes
        .iter()
        .map(|&mode| {
            Ok(TrainJob {
                hidden: args.hidden,
                k0: args.train.k0,
                init: InitKind::Random,
                cfg: args.train.config(mode, args.epochs)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let arms = jobs
        .iter()
        .map(|job| train_arm(&source, &ds, job, &seeds, args.common.jobs, false))
        .collect::<Result<Vec<Vec<SeedRun>>>>()?;
    let labels: Vec<String> = modes.iter().map(|&m| mode_label(m)).collect();
    let summary = AblateSummary {
        modes: modes
            .iter()
            .zip(&labels)
            .zip(&arms)
            .map(|((&m, l), runs)| ModeSummary { params: learnable_params(args.hidden, m), arm: arm_summary(l, runs) })
            .collect(),
        comparisons: (1..arms.len()).map(|i| compare(&labels[0], &arms[0], &labels[i], &arms[i])).collect(),
    };
    let records = labels
        .iter()
        .zip(arms)
        .flat_map(|(l, runs)| runs.into_iter().map(move |run| AblateRecord { mode: l.clone(), run }))
        .collect();
    Ok(Report { config: AblateConfig { task, seeds, data: source, hidden: args.hidden, jobs }, records, summary })
}
