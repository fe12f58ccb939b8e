//! Loss gradients with respect to mean-centered natural frequencies and
//! coupling weights.
//!
//! Three frequency-gradient estimators are provided and cross-checked in
//! tests: the two-phase readout `−(θ^β − θ*)/β`, the implicit-function form
//! `−J̃⁻¹ e`, and centered finite differences in the reduced coordinates.
//! Frequency gradients are indexed by unpinned node: entry `k` belongs to
//! node `k + 1` when [`PIN`] is 0.

use serde::Serialize;

use crate::equilibrium::{self, EquilibriumResult, NudgeSpec, SolverOptions, PIN};
use crate::error::{Error, Result};
use crate::graph::{CouplingGraph, Edge};
use crate::linalg::{self, dot, norm, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientKind {
    Frequency,
    Coupling,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientVector {
    pub values: Vec<f64>,
    pub kind: GradientKind,
    /// Nudging strength of a two-phase estimate; 0 for analytical and finite-difference estimates.
    pub beta_used: f64,
}

impl GradientVector {
    fn frequency(values: Vec<f64>, beta_used: f64) -> Self {
        Self { values, kind: GradientKind::Frequency, beta_used }
    }

    fn coupling(values: Vec<f64>, beta_used: f64) -> Self {
        Self { values, kind: GradientKind::Coupling, beta_used }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossSpec {
    pub outputs: Vec<usize>,
    pub targets: Vec<f64>,
}

impl LossSpec {
    pub fn new(outputs: Vec<usize>, targets: Vec<f64>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidParameter("loss needs at least one output".into()));
        }
        if outputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: outputs.len(), got: targets.len() });
        }
        Ok(Self { outputs, targets })
    }

    pub fn nudge(&self, beta: f64) -> Result<NudgeSpec> {
        NudgeSpec::new(beta, self.outputs.clone(), self.targets.clone())
    }
}

/// `½ Σ_{i ∈ outputs} (θ_i − θ_i^tgt)²` on unwrapped phases.
pub fn loss(theta: &[f64], spec: &LossSpec) -> f64 {
    0.5 * spec.outputs.iter().zip(&spec.targets).map(|(&o, &t)| (theta[o] - t).powi(2)).sum::<f64>()
}

/// Output error `e` in reduced coordinates (pinned entry dropped).
pub fn reduced_output_error(theta: &[f64], spec: &LossSpec) -> Vec<f64> {
    let mut e = vec![0.0; theta.len()];
    for (&o, &t) in spec.outputs.iter().zip(&spec.targets) {
        e[o] = theta[o] - t;
    }
    drop_pinned(e)
}

fn drop_pinned(full: Vec<f64>) -> Vec<f64> {
    full.into_iter().enumerate().filter(|&(i, _)| i != PIN).map(|(_, v)| v).collect()
}

/// Free equilibrium plus the nudged one, warm-started from the free state.
#[derive(Clone, Debug)]
pub struct EquilibriumPair {
    pub free: EquilibriumResult,
    pub nudged: EquilibriumResult,
}

pub fn solve_pair(
    g: &CouplingGraph,
    omega: &[f64],
    spec: &LossSpec,
    beta: f64,
    opts: &SolverOptions,
) -> Result<EquilibriumPair> {
    let free = equilibrium::solve_with(g, omega, None, None, opts)?.into_converged()?;
    let nudged = nudged_from(g, omega, spec, beta, &free, opts)?;
    Ok(EquilibriumPair { free, nudged })
}

/// Nudged equilibrium warm-started from an already solved free state.
pub fn nudged_from(
    g: &CouplingGraph,
    omega: &[f64],
    spec: &LossSpec,
    beta: f64,
    free: &EquilibriumResult,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    let nudge = spec.nudge(beta)?;
    equilibrium::solve_with(g, omega, Some(&nudge), Some(&free.theta_star), opts)?.into_converged()
}

/// `−(θ^β_k − θ*_k)/β` for every unpinned `k`.
pub fn phase_readout(theta_star: &[f64], theta_beta: &[f64], beta: f64) -> GradientVector {
    let values = theta_star
        .iter()
        .zip(theta_beta)
        .enumerate()
        .filter(|&(i, _)| i != PIN)
        .map(|(_, (s, b))| -(b - s) / beta)
        .collect();
    GradientVector::frequency(values, beta)
}

pub fn grad_two_phase(g: &CouplingGraph, omega: &[f64], spec: &LossSpec, beta: f64) -> Result<GradientVector> {
    let pair = solve_pair(g, omega, spec, beta, &SolverOptions::fast())?;
    Ok(phase_readout(&pair.free.theta_star, &pair.nudged.theta_star, beta))
}

/// `−J̃⁻¹ e` at a given free equilibrium.
pub fn analytical_at(g: &CouplingGraph, theta_star: &[f64], spec: &LossSpec) -> Result<GradientVector> {
    let e = reduced_output_error(theta_star, spec);
    // −J̃⁻¹e = (−J̃)⁻¹e, and −J̃ is SPD at a stable symmetric equilibrium
    let neg_jac: Matrix = equilibrium::reduced_jacobian(theta_star, g, None).scaled(-1.0);
    let values = linalg::solve_spd_or_general(&neg_jac, &e)?;
    Ok(GradientVector::frequency(values, 0.0))
}

pub fn grad_analytical(g: &CouplingGraph, omega: &[f64], spec: &LossSpec) -> Result<GradientVector> {
    let free = equilibrium::solve_with(g, omega, None, None, &SolverOptions::fast())?.into_converged()?;
    analytical_at(g, &free.theta_star, spec)
}

/// Centered differences of the loss, perturbing one reduced centered
/// frequency coordinate at a time by `±h`.
pub fn grad_finite_difference(g: &CouplingGraph, omega: &[f64], spec: &LossSpec, h: f64) -> Result<GradientVector> {
    let opts = SolverOptions::fast();
    let omega_c = equilibrium::center_frequencies(omega);
    let free = equilibrium::solve_centered(g, &omega_c, None, None, &opts)?.into_converged()?;
    let nodes: Vec<usize> = (0..g.n()).filter(|&i| i != PIN).collect();
    finite_difference_at(g, &omega_c, &free.theta_star, spec, h, &nodes)
}

/// Finite-difference frequency gradient restricted to `nodes` (all unpinned);
/// entries for other unpinned nodes are 0. `omega_c` is used as given.
pub fn finite_difference_at(
    g: &CouplingGraph,
    omega_c: &[f64],
    warm: &[f64],
    spec: &LossSpec,
    h: f64,
    nodes: &[usize],
) -> Result<GradientVector> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let opts = SolverOptions::fast();
    let mut full = vec![0.0; g.n()];
    let mut perturbed = omega_c.to_vec();
    for &k in nodes {
        if k == PIN {
            return Err(Error::InvalidParameter("the pinned node has no reduced coordinate".into()));
        }
        let base = omega_c[k];
        perturbed[k] = base + h;
        let plus = equilibrium::solve_centered(g, &perturbed, None, Some(warm), &opts)?.into_converged()?;
        perturbed[k] = base - h;
        let minus = equilibrium::solve_centered(g, &perturbed, None, Some(warm), &opts)?.into_converged()?;
        perturbed[k] = base;
        full[k] = (loss(&plus.theta_star, spec) - loss(&minus.theta_star, spec)) / (2.0 * h);
    }
    Ok(GradientVector::frequency(drop_pinned(full), 0.0))
}

/// `[cos(θ*_j − θ*_i) − cos(θ^β_j − θ^β_i)]/β` per edge.
pub fn grad_coupling(theta_star: &[f64], theta_beta: &[f64], beta: f64, edges: &[Edge]) -> GradientVector {
    let values = edges
        .iter()
        .map(|e| {
            let free = (theta_star[e.j] - theta_star[e.i]).cos();
            let nudged = (theta_beta[e.j] - theta_beta[e.i]).cos();
            (free - nudged) / beta
        })
        .collect();
    GradientVector::coupling(values, beta)
}

/// Finite-difference coupling gradient: each edge weight (both directions)
/// perturbed by `±h`, free equilibrium re-solved, centered loss difference.
pub fn grad_coupling_finite_difference(
    g: &CouplingGraph,
    omega: &[f64],
    spec: &LossSpec,
    h: f64,
) -> Result<GradientVector> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let opts = SolverOptions::fast();
    let free = equilibrium::solve_with(g, omega, None, None, &opts)?.into_converged()?;
    let base = g.weights();
    let mut values = Vec::with_capacity(base.len());
    let mut w = base.clone();
    for idx in 0..base.len() {
        let mut eval = |weight: f64| -> Result<f64> {
            w[idx] = weight;
            let gp = g.with_weights(&w)?;
            let r = equilibrium::solve_with(&gp, omega, None, Some(&free.theta_star), &opts)?.into_converged()?;
            Ok(loss(&r.theta_star, spec))
        };
        let up = eval(base[idx] + h)?;
        let down = eval(base[idx] - h)?;
        w[idx] = base[idx];
        values.push((up - down) / (2.0 * h));
    }
    Ok(GradientVector::coupling(values, 0.0))
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `max_k |a_k − b_k| / max_k |b_k|`.
pub fn max_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let scale = linalg::norm_inf(b);
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

/// `|‖a‖ − ‖b‖| / ‖b‖`.
pub fn magnitude_error(a: &[f64], b: &[f64]) -> f64 {
    (norm(a) - norm(b)).abs() / norm(b)
}
