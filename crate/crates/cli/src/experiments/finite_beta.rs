//! Bias of the two-phase estimate as a function of the nudging strength,
//! measured against the analytical gradient.

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use phasegrad_core::equilibrium::{self, SolverOptions};
use phasegrad_core::gradient::{self, cosine_similarity, magnitude_error};
use phasegrad_core::stats::mean;

use super::{log_log_slope, random_network, NetworkArgs};
use crate::common::{run_seeds, CommonArgs, DataSource};
use crate::output::Report;

#[derive(Parser, Clone, Debug)]
#[command(name = "finite-beta")]
pub struct FiniteBetaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_delimiter = ',', default_value = "1e-6,1e-5,1e-4,1e-3,1e-2,1e-1")]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 15)]
    pub n: usize,
    /// Smallest beta included in the slope fit; below it solver round-off dominates.
    #[arg(long, default_value_t = 1e-4)]
    pub fit_min_beta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteBetaConfig {
    pub betas: Vec<f64>,
    /// One network per seed.
    pub seeds: Vec<u64>,
    pub n: usize,
    pub network: NetworkArgs,
    pub fit_min_beta: f64,
    pub data: DataSource,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteBetaRecord {
    pub seed: u64,
    pub beta: f64,
    pub cosine: f64,
    /// `|g_beta - g| / |g|`.
    pub rel_error: f64,
    /// `| |g_beta| - |g| | / |g|`.
    pub magnitude_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaSummary {
    pub beta: f64,
    pub min_cosine: f64,
    pub mean_rel_error: f64,
    pub mean_magnitude_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteBetaSummary {
    pub per_beta: Vec<BetaSummary>,
    /// Mean relative error at 1e-3 over that at 1e-4, when both were run.
    pub error_ratio_1e3_1e4: Option<f64>,
    /// Log-log slope of mean relative error against beta.
    pub slope: Option<f64>,
}

pub type FiniteBetaReport = Report<FiniteBetaConfig, FiniteBetaRecord, FiniteBetaSummary>;

fn errors_for(seed: u64, betas: &[f64], args: &FiniteBetaArgs) -> Result<Vec<FiniteBetaRecord>> {
    let net = random_network("finite-beta", args.n, seed, &args.network)?;
    let opts = SolverOptions::fast();
    let free = equilibrium::solve_with(&net.graph, &net.omega, None, None, &opts)?.into_converged()?;
    let exact = gradient::analytical_at(&net.graph, &free.theta_star, &net.loss)?.values;
    let norm = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    betas
        .iter()
        .map(|&beta| {
            let nudged = gradient::nudged_from(&net.graph, &net.omega, &net.loss, beta, &free, &opts)?;
            let tp = gradient::phase_readout(&free.theta_star, &nudged.theta_star, beta).values;
            let diff = tp.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            Ok(FiniteBetaRecord {
                seed,
                beta,
                cosine: cosine_similarity(&tp, &exact)?,
                rel_error: diff / norm,
                magnitude_error: magnitude_error(&tp, &exact),
            })
        })
        .collect()
}

pub fn run(args: &FiniteBetaArgs) -> Result<FiniteBetaReport> {
    let betas = args.betas.clone();
    let seeds = args.common.seeds_or(20);
    let records: Vec<FiniteBetaRecord> =
        run_seeds(&seeds, args.common.jobs, |s| errors_for(s, &betas, args))?.into_iter().flatten().collect();
    let per_beta: Vec<BetaSummary> = betas
        .iter()
        .map(|&beta| {
            let rs: Vec<&FiniteBetaRecord> = records.iter().filter(|r| r.beta == beta).collect();
            BetaSummary {
                beta,
                min_cosine: rs.iter().map(|r| r.cosine).fold(f64::INFINITY, f64::min),
                mean_rel_error: mean(&rs.iter().map(|r| r.rel_error).collect::<Vec<_>>()),
                mean_magnitude_error: mean(&rs.iter().map(|r| r.magnitude_error).collect::<Vec<_>>()),
            }
        })
        .collect();
    let at = |b: f64| per_beta.iter().find(|s| (s.beta - b).abs() <= 1e-12 * b).map(|s| s.mean_rel_error);
    let error_ratio_1e3_1e4 = at(1e-3).zip(at(1e-4)).map(|(a, b)| a / b);
    let fit: Vec<&BetaSummary> = per_beta.iter().filter(|s| s.beta >= args.fit_min_beta).collect();
    let slope = log_log_slope(
        &fit.iter().map(|s| s.beta).collect::<Vec<_>>(),
        &fit.iter().map(|s| s.mean_rel_error).collect::<Vec<_>>(),
    );
    Ok(Report {
        config: FiniteBetaConfig {
            betas,
            seeds,
            n: args.n,
            network: args.network,
            fit_min_beta: args.fit_min_beta,
            data: args.common.data_source(),
        },
        records,
        summary: FiniteBetaSummary { per_beta, error_ratio_1e3_1e4, slope },
    })
}
