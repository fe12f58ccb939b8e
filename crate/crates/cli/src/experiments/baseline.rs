//! Logistic-regression reference accuracy on the same splits.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::data::{self, Task};
use phasegrad_core::stats::{mean, std_dev};

use crate::common::{parse_task, run_seeds, seed_data_split, CommonArgs, DataSource};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "baseline")]
pub struct BaselineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_delimiter = ',', default_value = "a-i,o-u", value_parser = parse_task)]
    pub tasks: Vec<Task>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineConfig {
    pub tasks: Vec<Task>,
    pub seeds: Vec<u64>,
    pub data: DataSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineRecord {
    pub task: String,
    pub seed: u64,
    pub test_acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskSummary {
    pub task: String,
    pub samples: usize,
    pub mean_test_acc: f64,
    pub std_test_acc: f64,
    pub min_test_acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub tasks: Vec<TaskSummary>,
}

pub type BaselineReport = Report<BaselineConfig, BaselineRecord, BaselineSummary>;

pub fn run(args: &BaselineArgs) -> Result<BaselineReport> {
    let source = args.common.data_source();
    let tasks = args.tasks.clone();
    let seeds = args.common.seeds_or(10);
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for task in &tasks {
        let ds = source.load(task)?;
        let accs =
            run_seeds(&seeds, args.common.jobs, |s| Ok(data::logistic_baseline(&ds, &seed_data_split(&ds, s)?)))?;
        summaries.push(TaskSummary {
            task: task.to_string(),
            samples: ds.len(),
            mean_test_acc: mean(&accs),
            std_test_acc: std_dev(&accs),
            min_test_acc: accs.iter().copied().fold(f64::INFINITY, f64::min),
        });
        records.extend(seeds.iter().zip(accs).map(|(&seed, test_acc)| BaselineRecord {
            task: task.to_string(),
            seed,
            test_acc,
        }));
    }
    Ok(Report {
        config: BaselineConfig { tasks, seeds, data: source },
        records,
        summary: BaselineSummary { tasks: summaries },
    })
}
