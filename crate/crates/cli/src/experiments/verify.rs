//! Three-way gradient check (two-phase, analytical, finite difference) on
//! random networks of increasing size.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::equilibrium::{self, SolverOptions, PIN};
use phasegrad_core::gradient::{self, cosine_similarity, max_relative_deviation};

use super::{random_network, NetworkArgs};
use crate::common::{run_seeds, CommonArgs, DataSource};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "verify")]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Network sizes.
    #[arg(long, value_delimiter = ',', default_value = "6,10,15,20,30,50,100,200")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1e-4)]
    pub beta: f64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    /// Largest size that also gets the coupling-gradient check (0 disables it).
    #[arg(long, default_value_t = 100)]
    pub coupling_max_n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub network: NetworkArgs,
    pub beta: f64,
    pub h: f64,
    pub coupling_max_n: usize,
    pub data: DataSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub n: usize,
    pub seed: u64,
    pub edges: usize,
    /// Reduced frequency coordinates (N − 1).
    pub params: usize,
    pub cos_tp_fd: f64,
    pub cos_an_tp: f64,
    pub cos_an_fd: f64,
    pub max_dev_tp_an: f64,
    pub max_dev_fd_an: f64,
    pub residual: f64,
    pub nudged_residual: f64,
    pub newton_iterations: usize,
    pub jacobian_cond: Option<f64>,
    pub cos_coupling: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub min_cos_tp_fd: f64,
    pub min_cos_an_tp: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub per_size: Vec<SizeSummary>,
    /// Smallest of the three pairwise cosines over every record.
    pub min_cosine: f64,
    pub max_residual: f64,
    pub min_cos_coupling: Option<f64>,
}

pub type VerifyReport = Report<VerifyConfig, VerifyRecord, VerifySummary>;

pub fn check_network(n: usize, seed: u64, args: &VerifyArgs) -> Result<VerifyRecord> {
    let net = random_network("verify", n, seed, &args.network)?;
    let (g, omega, spec) = (&net.graph, &net.omega, &net.loss);
    let free = equilibrium::solve_with(g, omega, None, None, &SolverOptions::default())?.into_converged()?;
    let nudged = gradient::nudged_from(g, omega, spec, args.beta, &free, &SolverOptions::fast())?;
    let tp = gradient::phase_readout(&free.theta_star, &nudged.theta_star, args.beta);
    let an = gradient::analytical_at(g, &free.theta_star, spec)?;
    let nodes: Vec<usize> = (0..n).filter(|&i| i != PIN).collect();
    let omega_c = equilibrium::center_frequencies(omega);
    let fd = gradient::finite_difference_at(g, &omega_c, &free.theta_star, spec, args.h, &nodes)?;
    let cos_coupling = if n <= args.coupling_max_n {
        let tp_k = gradient::grad_coupling(&free.theta_star, &nudged.theta_star, args.beta, g.edges());
        let fd_k = gradient::grad_coupling_finite_difference(g, omega, spec, args.h)?;
        Some(cosine_similarity(&tp_k.values, &fd_k.values)?)
    } else {
        None
    };
    Ok(VerifyRecord {
        n,
        seed,
        edges: g.edges().len(),
        params: n - 1,
        cos_tp_fd: cosine_similarity(&tp.values, &fd.values)?,
        cos_an_tp: cosine_similarity(&an.values, &tp.values)?,
        cos_an_fd: cosine_similarity(&an.values, &fd.values)?,
        max_dev_tp_an: max_relative_deviation(&tp.values, &an.values),
        max_dev_fd_an: max_relative_deviation(&fd.values, &an.values),
        residual: free.residual_inf,
        nudged_residual: nudged.residual_inf,
        newton_iterations: free.iterations,
        jacobian_cond: free.jacobian_cond,
        cos_coupling,
    })
}

pub fn run(args: &VerifyArgs) -> Result<VerifyReport> {
    let sizes = args.sizes.clone();
    let seeds = args.common.seeds_or(1);
    let mut records = Vec::new();
    for &n in &sizes {
        records.extend(run_seeds(&seeds, args.common.jobs, |s| check_network(n, s, args))?);
    }
    let per_size = sizes
        .iter()
        .map(|&n| {
            let rs: Vec<&VerifyRecord> = records.iter().filter(|r| r.n == n).collect();
            SizeSummary {
                n,
                min_cos_tp_fd: rs.iter().map(|r| r.cos_tp_fd).fold(f64::INFINITY, f64::min),
                min_cos_an_tp: rs.iter().map(|r| r.cos_an_tp).fold(f64::INFINITY, f64::min),
                max_residual: rs.iter().map(|r| r.residual).fold(0.0, f64::max),
            }
        })
        .collect();
    let min_cosine = records.iter().flat_map(|r| [r.cos_tp_fd, r.cos_an_tp, r.cos_an_fd]).fold(f64::INFINITY, f64::min);
    let max_residual = records.iter().map(|r| r.residual.max(r.nudged_residual)).fold(0.0, f64::max);
    let min_cos_coupling = records.iter().filter_map(|r| r.cos_coupling).reduce(f64::min);
    Ok(Report {
        config: VerifyConfig {
            sizes,
            seeds,
            network: args.network,
            beta: args.beta,
            h: args.h,
            coupling_max_n: args.coupling_max_n,
            data: args.common.data_source(),
        },
        records,
        summary: VerifySummary { per_size, min_cosine, max_residual, min_cos_coupling },
    })
}
