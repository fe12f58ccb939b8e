//! One module per subcommand. Each exposes a clap-parsable argument struct
//! and a `run` returning a typed [`Report`](crate::output::Report).

pub mod ablate;
pub mod asymmetry;
pub mod baseline;
pub mod converge_diag;
pub mod finite_beta;
pub mod grad_rule;
pub mod spectral;
pub mod sweep;
pub mod verify;

use anyhow::Result;
use clap::Args;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use phasegrad_core::gradient::LossSpec;
use phasegrad_core::graph::CouplingGraph;
use phasegrad_core::learning::TrainMode;
use phasegrad_core::rng;
use phasegrad_core::stats::{self, ConvergenceSummary, WelchResult, CONVERGENCE_THRESHOLD};

use crate::common::{outcomes, SeedRun};

/// Random-network parameters for the gradient checks.
#[derive(Args, Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetworkArgs {
    /// Edge probability.
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    /// Mean coupling; weights are drawn from k_mean * U(0.5, 1.5).
    #[arg(long, default_value_t = 5.0)]
    pub k_mean: f64,
    /// Standard deviation of the natural frequencies.
    #[arg(long, default_value_t = 0.3)]
    pub omega_std: f64,
}

impl Default for NetworkArgs {
    fn default() -> Self {
        Self { p: 0.6, k_mean: 5.0, omega_std: 0.3 }
    }
}

pub struct Network {
    pub graph: CouplingGraph,
    pub omega: Vec<f64>,
    pub loss: LossSpec,
}

/// Random connected network of `n` nodes with Gaussian frequencies and
/// output targets drawn from U(-0.5, 0.5). Streams are keyed on
/// `(namespace, seed, n)`, so each size gets its own network per seed.
pub fn random_network(namespace: &str, n: usize, seed: u64, net: &NetworkArgs) -> Result<Network> {
    let graph =
        CouplingGraph::erdos_renyi(n, net.p, net.k_mean, &mut rng::stream(namespace, seed, &format!("graph:{n}")))?;
    let normal = Normal::new(0.0, net.omega_std)?;
    let mut r = rng::stream(namespace, seed, &format!("omega:{n}"));
    let omega: Vec<f64> = (0..n).map(|_| normal.sample(&mut r)).collect();
    let mut r = rng::stream(namespace, seed, &format!("targets:{n}"));
    let outputs = graph.output_nodes().to_vec();
    let targets = outputs.iter().map(|_| r.random_range(-0.5..0.5)).collect();
    let loss = LossSpec::new(outputs, targets)?;
    Ok(Network { graph, omega, loss })
}

/// Trainable parameter count of a layered `2 + hidden + 2` network.
pub fn learnable_params(hidden: usize, mode: TrainMode) -> usize {
    let omega = hidden + 2;
    let edges = 5 * hidden - 1;
    match mode {
        TrainMode::OmegaOnly => omega,
        TrainMode::KOnly => edges,
        TrainMode::KMatched(n) => n.min(edges),
        TrainMode::Joint => omega + edges,
    }
}

/// Outcome of one arm (a mode or an init) over its seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArmSummary {
    pub label: String,
    pub convergence: ConvergenceSummary,
    /// Seeds whose final test accuracy exceeds 0.6.
    pub successes: usize,
    pub total_skips: usize,
}

pub fn arm_summary(label: &str, runs: &[SeedRun]) -> ArmSummary {
    ArmSummary {
        label: label.into(),
        convergence: stats::summarize(&outcomes(runs), CONVERGENCE_THRESHOLD),
        successes: runs.iter().filter(|r| r.success).count(),
        total_skips: runs.iter().map(|r| r.skips).sum(),
    }
}

/// Arm `a` against arm `b`: converged-accuracy gap and the two tests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    /// Converged mean test accuracy of `a` minus that of `b`, in percentage points.
    pub gap_points: Option<f64>,
    /// Welch test on converged test accuracies; absent when it is undefined.
    pub welch: Option<WelchResult>,
    pub welch_note: Option<String>,
    /// Fisher exact test on convergence counts.
    pub fisher_p: f64,
}

pub fn compare(a_label: &str, a: &[SeedRun], b_label: &str, b: &[SeedRun]) -> Comparison {
    let conv = |rs: &[SeedRun]| -> Vec<f64> {
        rs.iter().filter(|r| r.final_train_acc > CONVERGENCE_THRESHOLD).map(|r| r.final_test_acc).collect()
    };
    let (ca, cb) = (conv(a), conv(b));
    let gap_points = (!ca.is_empty() && !cb.is_empty()).then(|| 100.0 * (stats::mean(&ca) - stats::mean(&cb)));
    let (welch, welch_note) = match stats::welch_t_test(&ca, &cb) {
        Ok(w) => (Some(w), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let count = |rs: &[SeedRun], c: &[f64]| [c.len() as u64, (rs.len() - c.len()) as u64];
    Comparison {
        a: a_label.into(),
        b: b_label.into(),
        gap_points,
        welch,
        welch_note,
        fisher_p: stats::fisher_exact_2x2([count(a, &ca), count(b, &cb)]),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Jaccard overlap of two index sets; 1 when both are empty.
pub fn jaccard(a: &[u64], b: &[u64]) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-3, 1e-2, 1e-1];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn parameter_counts_of_layered_sizes() {
        let omega: Vec<usize> = [3, 5, 7, 10, 15].iter().map(|&h| learnable_params(h, TrainMode::OmegaOnly)).collect();
        let k: Vec<usize> = [3, 5, 7, 10, 15].iter().map(|&h| learnable_params(h, TrainMode::KOnly)).collect();
        assert_eq!(omega, vec![5, 7, 9, 12, 17]);
        assert_eq!(k, vec![14, 24, 34, 49, 74]);
        for h in [3, 5, 15] {
            assert_eq!(
                learnable_params(h, TrainMode::KOnly),
                CouplingGraph::layered(2, h, 2, 1.0).unwrap().edges().len()
            );
        }
        assert_eq!(learnable_params(5, TrainMode::KMatched(7)), 7);
    }

    #[test]
    fn jaccard_edges() {
        assert_eq!(jaccard(&[], &[]), 1.0);
        assert_eq!(jaccard(&[1, 2], &[2, 3]), 1.0 / 3.0);
        assert_eq!(jaccard(&[4], &[4]), 1.0);
    }

    #[test]
    fn networks_are_reproducible_per_size() {
        let net = NetworkArgs::default();
        let a = random_network("t", 10, 3, &net).unwrap();
        let b = random_network("t", 10, 3, &net).unwrap();
        assert_eq!(a.omega, b.omega);
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.loss.outputs, vec![8, 9]);
        assert!(a.loss.targets.iter().all(|t| t.abs() <= 0.5));
        let c = random_network("t", 10, 4, &net).unwrap();
        assert_ne!(a.omega, c.omega);
    }
}
