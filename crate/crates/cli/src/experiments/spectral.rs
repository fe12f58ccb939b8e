//! Initialization study: random, spectral, output-only and multi-start
//! frequency initializations, with paired rescue counts.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::data::Task;
use phasegrad_core::learning::TrainMode;
use phasegrad_core::stats::{mean, std_dev};

use super::{arm_summary, ArmSummary};
use crate::common::{
    mode_label, parse_task, train_arm, CommonArgs, DataSource, InitKind, SeedRun, TrainArgs, TrainJob,
};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "spectral")]
pub struct SpectralArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = "a-i", value_parser = parse_task)]
    pub task: Task,
    /// random | spectral | output-only | multi-start[:n]. Rescue counts are
    /// paired against `random`, which must come first.
    #[arg(long, value_delimiter = ',', default_value = "random,spectral,output-only,multi-start:10")]
    pub inits: Vec<InitKind>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub hidden: usize,
    /// Seeds per generalization setting.
    #[arg(long, default_value_t = 50)]
    pub generalization_seeds: u64,
    /// Skip the generalization settings.
    #[arg(long)]
    pub no_generalization: bool,
}

/// One task/mode/architecture combination.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Setting {
    pub name: String,
    pub task: Task,
    pub hidden: usize,
    pub mode: TrainMode,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralConfig {
    pub settings: Vec<Setting>,
    pub primary_inits: Vec<InitKind>,
    pub primary_seeds: Vec<u64>,
    pub generalization_inits: Vec<InitKind>,
    pub generalization_seeds: Vec<u64>,
    pub data: DataSource,
    pub epochs: usize,
    pub train: TrainArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRecord {
    pub setting: String,
    pub init: InitKind,
    #[serde(flatten)]
    pub run: SeedRun,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitSummary {
    pub setting: String,
    pub init: InitKind,
    #[serde(flatten)]
    pub arm: ArmSummary,
    /// Mean and sample std of test accuracy over successful seeds.
    pub success_mean_acc: Option<f64>,
    pub success_std: Option<f64>,
}

/// Paired against random init on the same seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rescue {
    pub setting: String,
    pub init: InitKind,
    /// Failed under random, succeeded here.
    pub rescued: usize,
    /// Succeeded under random, failed here.
    pub lost: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub inits: Vec<InitSummary>,
    pub rescues: Vec<Rescue>,
}

pub type SpectralReport = Report<SpectralConfig, SpectralRecord, SpectralSummary>;

pub fn generalization_settings() -> Result<Vec<Setting>> {
    let s = |task: &str, mode, hidden: usize| -> Result<Setting> {
        Ok(Setting {
            name: format!("{task}/{}/2+{hidden}+2", mode_label(mode)),
            task: Task::parse(task)?,
            hidden,
            mode,
        })
    };
    Ok(vec![s("o-u", TrainMode::OmegaOnly, 5)?, s("a-i", TrainMode::KOnly, 5)?, s("a-i", TrainMode::OmegaOnly, 8)?])
}

pub fn run(args: &SpectralArgs) -> Result<SpectralReport> {
    let source = args.common.data_source();
    let primary_seeds = args.common.seeds_or(100);
    let primary_inits = args.inits.clone();
    anyhow::ensure!(!primary_inits.is_empty(), "no inits given");
    let primary =
        Setting { name: "primary".into(), task: args.task.clone(), hidden: args.hidden, mode: TrainMode::OmegaOnly };
    let generalization_inits = vec![InitKind::Random, InitKind::Spectral];
    let generalization_seeds: Vec<u64> = (0..args.generalization_seeds).collect();
    let mut plan: Vec<(Setting, &[InitKind], &[u64])> = vec![(primary, &primary_inits, &primary_seeds)];
    if !args.no_generalization {
        for s in generalization_settings()? {
            plan.push((s, &generalization_inits, &generalization_seeds));
        }
    }

    let mut records = Vec::new();
    let mut inits = Vec::new();
    let mut rescues = Vec::new();
    for (setting, kinds, seeds) in &plan {
        let ds = source.load(&setting.task)?;
        let mut random: Option<Vec<SeedRun>> = None;
        for &init in kinds.iter() {
            let job = TrainJob {
                hidden: setting.hidden,
                k0: args.train.k0,
                init,
                cfg: args.train.config(setting.mode, args.epochs)?,
            };
            let runs = train_arm(&source, &ds, &job, seeds, args.common.jobs, false)?;
            let ok: Vec<f64> = runs.iter().filter(|r| r.success).map(|r| r.final_test_acc).collect();
            inits.push(InitSummary {
                setting: setting.name.clone(),
                init,
                arm: arm_summary(&format!("{}:{}", setting.name, serde_json::to_value(init)?), &runs),
                success_mean_acc: (!ok.is_empty()).then(|| mean(&ok)),
                success_std: (ok.len() >= 2).then(|| std_dev(&ok)),
            });
            if init == InitKind::Random {
                random = Some(runs.clone());
            } else if let Some(base) = &random {
                rescues.push(Rescue {
                    setting: setting.name.clone(),
                    init,
                    rescued: base.iter().zip(&runs).filter(|(b, r)| !b.success && r.success).count(),
                    lost: base.iter().zip(&runs).filter(|(b, r)| b.success && !r.success).count(),
                });
            }
            records.extend(runs.into_iter().map(|run| SpectralRecord { setting: setting.name.clone(), init, run }));
        }
    }
    Ok(Report {
        config: SpectralConfig {
            settings: plan.iter().map(|p| p.0.clone()).collect(),
            primary_inits,
            primary_seeds,
            generalization_inits,
            generalization_seeds: if args.no_generalization { Vec::new() } else { generalization_seeds },
            data: source,
            epochs: args.epochs,
            train: args.train.clone(),
        },
        records,
        summary: SpectralSummary { inits, rescues },
    })
}
