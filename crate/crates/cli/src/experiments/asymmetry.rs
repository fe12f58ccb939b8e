//! Two-phase versus finite-difference agreement as the couplings are made
//! increasingly non-reciprocal.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::equilibrium::{self, SolverOptions, PIN};
use phasegrad_core::gradient::{self, cosine_similarity};
use phasegrad_core::rng;
use phasegrad_core::stats::{mean, std_dev};

use super::{random_network, NetworkArgs};
use crate::common::{run_seeds, CommonArgs, DataSource};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "asymmetry")]
pub struct AsymmetryArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Relative perturbation levels; each direction of an edge is scaled by 1 + level * U(-1, 1).
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.5")]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 15)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymmetryConfig {
    pub levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub n: usize,
    pub network: NetworkArgs,
    pub beta: f64,
    pub h: f64,
    pub data: DataSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymmetryRecord {
    pub level: f64,
    pub seed: u64,
    pub cos_tp_fd: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: f64,
    pub mean_cos: f64,
    pub std_cos: f64,
    pub min_cos: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymmetrySummary {
    pub per_level: Vec<LevelSummary>,
    /// Mean cosine never increases with the level (levels in the given order).
    pub monotone_non_increasing: bool,
}

pub type AsymmetryReport = Report<AsymmetryConfig, AsymmetryRecord, AsymmetrySummary>;

fn check(level: f64, seed: u64, args: &AsymmetryArgs) -> Result<AsymmetryRecord> {
    let net = random_network("asymmetry", args.n, seed, &args.network)?;
    let g = net.graph.with_asymmetry(level, &mut rng::stream("asymmetry", seed, "perturb"))?;
    let opts = SolverOptions::fast();
    let free = equilibrium::solve_with(&g, &net.omega, None, None, &opts)?.into_converged()?;
    let nudged = gradient::nudged_from(&g, &net.omega, &net.loss, args.beta, &free, &opts)?;
    let tp = gradient::phase_readout(&free.theta_star, &nudged.theta_star, args.beta);
    let nodes: Vec<usize> = (0..args.n).filter(|&i| i != PIN).collect();
    let omega_c = equilibrium::center_frequencies(&net.omega);
    let fd = gradient::finite_difference_at(&g, &omega_c, &free.theta_star, &net.loss, args.h, &nodes)?;
    Ok(AsymmetryRecord {
        level,
        seed,
        cos_tp_fd: cosine_similarity(&tp.values, &fd.values)?,
        residual: free.residual_inf,
    })
}

pub fn run(args: &AsymmetryArgs) -> Result<AsymmetryReport> {
    let levels = args.levels.clone();
    let seeds = args.common.seeds_or(10);
    let mut records = Vec::new();
    for &level in &levels {
        records.extend(run_seeds(&seeds, args.common.jobs, |s| check(level, s, args))?);
    }
    let per_level: Vec<LevelSummary> = levels
        .iter()
        .map(|&level| {
            let cos: Vec<f64> = records.iter().filter(|r| r.level == level).map(|r| r.cos_tp_fd).collect();
            LevelSummary {
                level,
                mean_cos: mean(&cos),
                std_cos: std_dev(&cos),
                min_cos: cos.iter().copied().fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let monotone_non_increasing = per_level.windows(2).all(|w| w[1].mean_cos <= w[0].mean_cos);
    Ok(Report {
        config: AsymmetryConfig {
            levels,
            seeds,
            n: args.n,
            network: args.network,
            beta: args.beta,
            h: args.h,
            data: args.common.data_source(),
        },
        records,
        summary: AsymmetrySummary { per_level, monotone_non_increasing },
    })
}
