//! Free and nudged phase-locked equilibria of a Kuramoto network.
//!
//! In the frame co-rotating with the mean frequency, a locked state satisfies
//!
//! ```text
//! F_i(θ) = ω_i^c + Σ_j K_ij sin(θ_j − θ_i) − β (θ_i − θ_i^tgt) [i ∈ outputs] = 0
//! ```
//!
//! with `ω^c` the mean-centered frequencies. Adding a constant to every phase
//! leaves the free system unchanged, so node [`PIN`] is held at zero and the
//! remaining `N − 1` equations are solved by damped Newton iteration.
//! Phases are never wrapped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{self, CouplingGraph};
use crate::linalg::{self, eig_symmetric, norm_inf, singular_values, Lu, Matrix};

/// Index of the phase held at zero.
pub const PIN: usize = 0;

/// Position of `node` in reduced coordinates; `None` for the pinned node.
#[allow(clippy::absurd_extreme_comparisons)]
pub fn reduced_index(node: usize) -> Option<usize> {
    match node {
        PIN => None,
        k if k < PIN => Some(k),
        k => Some(k - 1),
    }
}

/// Node behind reduced coordinate `idx`.
#[allow(clippy::absurd_extreme_comparisons)]
pub fn node_index(idx: usize) -> usize {
    if idx < PIN {
        idx
    } else {
        idx + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillatorState {
    theta: Vec<f64>,
    omega: Vec<f64>,
    pin: usize,
}

impl OscillatorState {
    pub fn new(theta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if theta.len() != omega.len() {
            return Err(Error::DimensionMismatch { expected: omega.len(), got: theta.len() });
        }
        if theta.is_empty() {
            return Err(Error::InvalidParameter("empty oscillator state".into()));
        }
        if theta.iter().chain(&omega).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite phase or frequency".into()));
        }
        if theta[PIN] != 0.0 {
            return Err(Error::InvalidParameter(format!("pinned phase must be 0, got {}", theta[PIN])));
        }
        Ok(Self { theta, omega, pin: PIN })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn pin(&self) -> usize {
        self.pin
    }
}

/// Weak pull of `outputs` toward `targets` with strength `beta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NudgeSpec {
    pub beta: f64,
    pub outputs: Vec<usize>,
    pub targets: Vec<f64>,
}

impl NudgeSpec {
    pub fn new(beta: f64, outputs: Vec<usize>, targets: Vec<f64>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if outputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: outputs.len(), got: targets.len() });
        }
        Ok(Self { beta, outputs, targets })
    }

    /// Checks `outputs ⊆ g.output_nodes()`.
    pub fn validate_for(&self, g: &CouplingGraph) -> Result<()> {
        match self.outputs.iter().find(|o| !g.output_nodes().contains(o)) {
            Some(o) => Err(Error::InvalidParameter(format!("node {o} is not an output of the graph"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub theta_star: Vec<f64>,
    /// Max-norm of the reduced residual at `theta_star`.
    pub residual_inf: f64,
    pub iterations: usize,
    /// 2-norm condition number of the reduced Jacobian, when requested.
    pub jacobian_cond: Option<f64>,
    pub converged: bool,
}

impl EquilibriumResult {
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { residual: self.residual_inf, iterations: self.iterations })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub compute_condition: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, max_halvings: 30, compute_condition: true }
    }
}

impl SolverOptions {
    /// Defaults without the condition-number diagnostic.
    pub fn fast() -> Self {
        Self { compute_condition: false, ..Self::default() }
    }
}

pub fn center_frequencies(omega: &[f64]) -> Vec<f64> {
    if omega.is_empty() {
        return Vec::new();
    }
    let mean = omega.iter().sum::<f64>() / omega.len() as f64;
    omega.iter().map(|w| w - mean).collect()
}

fn nudge_mask(n: usize, nudge: Option<&NudgeSpec>) -> Vec<Option<(f64, f64)>> {
    let mut mask = vec![None; n];
    if let Some(nd) = nudge {
        for (&o, &t) in nd.outputs.iter().zip(&nd.targets) {
            mask[o] = Some((nd.beta, t));
        }
    }
    mask
}

fn residual_dense(theta: &[f64], omega_c: &[f64], k: &Matrix, mask: &[Option<(f64, f64)>]) -> Vec<f64> {
    let n = theta.len();
    (0..n)
        .map(|i| {
            let row = k.row(i);
            let mut f = omega_c[i];
            for j in 0..n {
                if row[j] != 0.0 {
                    f += row[j] * (theta[j] - theta[i]).sin();
                }
            }
            if let Some((beta, tgt)) = mask[i] {
                f -= beta * (theta[i] - tgt);
            }
            f
        })
        .collect()
}

fn jacobian_dense(theta: &[f64], k: &Matrix, mask: &[Option<(f64, f64)>]) -> Matrix {
    let n = theta.len();
    let mut jac = Matrix::zeros(n, n);
    for i in 0..n {
        let row = k.row(i);
        let mut diag = 0.0;
        for j in 0..n {
            if j != i && row[j] != 0.0 {
                let v = row[j] * (theta[j] - theta[i]).cos();
                jac[(i, j)] = v;
                diag -= v;
            }
        }
        if let Some((beta, _)) = mask[i] {
            diag -= beta;
        }
        jac[(i, i)] = diag;
    }
    jac
}

/// Full `N`-component residual `F(θ)`; the nudge term is included when given.
pub fn residual(theta: &[f64], omega_c: &[f64], g: &CouplingGraph, nudge: Option<&NudgeSpec>) -> Vec<f64> {
    assert_eq!(theta.len(), g.n());
    assert_eq!(omega_c.len(), g.n());
    residual_dense(theta, omega_c, &g.coupling_matrix(), &nudge_mask(g.n(), nudge))
}

/// Full `N × N` Jacobian `∂F/∂θ`.
pub fn jacobian(theta: &[f64], g: &CouplingGraph, nudge: Option<&NudgeSpec>) -> Matrix {
    assert_eq!(theta.len(), g.n());
    jacobian_dense(theta, &g.coupling_matrix(), &nudge_mask(g.n(), nudge))
}

/// `σ_max / σ_min`. Uses eigenvalues when `m` is symmetric.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows(), got: m.cols() });
    }
    if m.rows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let (hi, lo) = if m.max_asymmetry() <= 1e-12 * scale {
        let dec = eig_symmetric(m)?;
        dec.eigenvalues.iter().fold((0.0_f64, f64::INFINITY), |(hi, lo), l| (hi.max(l.abs()), lo.min(l.abs())))
    } else {
        let sv = singular_values(m);
        (sv[0], *sv.last().unwrap())
    };
    if lo == 0.0 || !lo.is_finite() {
        return Err(Error::Singular);
    }
    Ok((hi / lo).max(1.0))
}

/// Solves with mean-centering applied to `omega`.
pub fn solve(
    g: &CouplingGraph,
    omega: &[f64],
    nudge: Option<&NudgeSpec>,
    warm_start: Option<&[f64]>,
) -> Result<EquilibriumResult> {
    solve_with(g, omega, nudge, warm_start, &SolverOptions::default())
}

pub fn solve_with(
    g: &CouplingGraph,
    omega: &[f64],
    nudge: Option<&NudgeSpec>,
    warm_start: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    if omega.len() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: omega.len() });
    }
    solve_centered(g, &center_frequencies(omega), nudge, warm_start, opts)
}

/// Solves the reduced system with `omega_c` used as given (no recentering),
/// so callers can perturb individual centered coordinates.
pub fn solve_centered(
    g: &CouplingGraph,
    omega_c: &[f64],
    nudge: Option<&NudgeSpec>,
    warm_start: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    let n = g.n();
    if omega_c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: omega_c.len() });
    }
    if let Some(nd) = nudge {
        nd.validate_for(g)?;
    }
    let mut theta = match warm_start {
        Some(w) if w.len() != n => return Err(Error::DimensionMismatch { expected: n, got: w.len() }),
        Some(w) => {
            let offset = w[PIN];
            w.iter().map(|t| t - offset).collect()
        }
        None => vec![0.0; n],
    };
    theta[PIN] = 0.0;

    let k = g.coupling_matrix();
    let mask = nudge_mask(n, nudge);
    let reduced = |full: Vec<f64>| -> Vec<f64> {
        full.into_iter().enumerate().filter(|&(i, _)| i != PIN).map(|(_, v)| v).collect()
    };

    let mut r = reduced(residual_dense(&theta, omega_c, &k, &mask));
    let mut r_inf = norm_inf(&r);
    let mut iterations = 0;
    let mut converged = r_inf <= opts.tol;

    while !converged && iterations < opts.max_iter && r_inf.is_finite() {
        let jac = graph::reduce(&jacobian_dense(&theta, &k, &mask), PIN)?;
        let lu = match Lu::factor(&jac) {
            Ok(lu) => lu,
            Err(_) => break,
        };
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = lu.solve(&neg_r);
        let merit = linalg::norm(&r);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = theta.clone();
            for (idx, dx) in step.iter().enumerate() {
                let node = node_index(idx);
                trial[node] += t * dx;
            }
            let r_trial = reduced(residual_dense(&trial, omega_c, &k, &mask));
            if linalg::norm(&r_trial) < merit {
                accepted = Some((trial, r_trial));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, r_trial)) = accepted else { break };
        theta = trial;
        r = r_trial;
        r_inf = norm_inf(&r);
        iterations += 1;
        converged = r_inf <= opts.tol;
    }

    let jacobian_cond = if opts.compute_condition && theta.iter().all(|t| t.is_finite()) {
        condition_number(&graph::reduce(&jacobian_dense(&theta, &k, &mask), PIN)?).ok()
    } else {
        None
    };
    Ok(EquilibriumResult { theta_star: theta, residual_inf: r_inf, iterations, jacobian_cond, converged })
}

/// `J̃` at `theta`: the Jacobian with the pinned row and column removed.
pub fn reduced_jacobian(theta: &[f64], g: &CouplingGraph, nudge: Option<&NudgeSpec>) -> Matrix {
    graph::reduce(&jacobian(theta, g, nudge), PIN).expect("pin is in range for a non-empty graph")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use std::f64::consts::PI;

    fn pair(k: f64) -> CouplingGraph {
        CouplingGraph::new(2, vec![], vec![0], vec![1], vec![Edge { i: 0, j: 1, weight: k }]).unwrap()
    }

    #[test]
    fn centering() {
        assert_eq!(center_frequencies(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(center_frequencies(&[0.5, -0.5]), vec![0.5, -0.5]);
        let v = [0.3, -1.7, 2.2, 9.1, -4.4];
        let s: f64 = center_frequencies(&v).iter().sum();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(s.abs() <= 1e-14 * scale);
    }

    #[test]
    fn residual_examples() {
        let g = CouplingGraph::layered(2, 3, 2, 3.0).unwrap();
        let zero = vec![0.0; g.n()];
        assert!(residual(&zero, &zero, &g, None).iter().all(|&r| r == 0.0));

        let g2 = pair(1.0);
        let r = residual(&[0.0, -PI / 6.0], &[0.5, -0.5], &g2, None);
        assert!(r.iter().all(|v| v.abs() < 1e-15), "{r:?}");

        let nudge = NudgeSpec::new(0.1, vec![5, 6], vec![0.2, -0.4]).unwrap();
        let mut theta = vec![0.0; g.n()];
        theta[5] = 0.2;
        theta[6] = -0.4;
        let free = residual(&theta, &zero, &g, None);
        let nudged = residual(&theta, &zero, &g, Some(&nudge));
        assert_eq!(free, nudged);
    }

    #[test]
    fn jacobian_at_zero_is_negative_laplacian() {
        let g = CouplingGraph::layered(2, 5, 2, 3.0).unwrap();
        let j = jacobian(&vec![0.0; g.n()], &g, None);
        let l = graph::laplacian(&g, &g.weights()).unwrap();
        assert!(j.max_abs_diff(&l.scaled(-1.0)) == 0.0);
    }

    #[test]
    fn jacobian_pair_closed_form() {
        let g = pair(1.0);
        let jt = reduced_jacobian(&[0.0, -PI / 6.0], &g, None);
        assert!((jt[(0, 0)] + (PI / 6.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn nudged_jacobian_adds_beta_on_outputs() {
        let g = CouplingGraph::layered(2, 3, 2, 3.0).unwrap();
        let theta: Vec<f64> = (0..g.n()).map(|i| 0.1 * i as f64).collect();
        let nudge = NudgeSpec::new(0.25, vec![5, 6], vec![0.0, PI]).unwrap();
        let free = jacobian(&theta, &g, None);
        let nudged = jacobian(&theta, &g, Some(&nudge));
        for i in 0..g.n() {
            let expected = if i >= 5 { free[(i, i)] - 0.25 } else { free[(i, i)] };
            assert_eq!(nudged[(i, i)], expected);
        }
    }

    #[test]
    fn solve_equal_frequencies_is_trivial() {
        let g = CouplingGraph::layered(2, 5, 2, 3.0).unwrap();
        let res = solve(&g, &vec![0.7; g.n()], None, None).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 1);
        assert!(res.theta_star.iter().all(|t| t.abs() < 1e-14));
    }

    #[test]
    fn solve_pair_arcsin() {
        let res = solve(&pair(1.0), &[0.5, -0.5], None, None).unwrap();
        assert!(res.converged);
        assert!((res.theta_star[1] + PI / 6.0).abs() <= 1e-12);
        assert!(res.residual_inf <= 1e-12);
        // 2x2 reduced Jacobian is the scalar -cos(π/6)
        assert!((res.jacobian_cond.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_rejects_foreign_nudge_outputs() {
        let g = CouplingGraph::layered(2, 3, 2, 3.0).unwrap();
        let nudge = NudgeSpec::new(0.1, vec![2], vec![0.0]).unwrap();
        assert!(solve(&g, &vec![0.0; g.n()], Some(&nudge), None).is_err());
    }

    #[test]
    fn solve_reports_non_convergence() {
        // |ω^c| > K: no locked state exists for a single pair
        let res = solve(&pair(1.0), &[2.0, -2.0], None, None).unwrap();
        assert!(!res.converged);
        assert!(res.clone().into_converged().is_err());
    }

    #[test]
    fn nudge_spec_validation() {
        assert!(NudgeSpec::new(0.0, vec![1], vec![0.0]).is_err());
        assert!(NudgeSpec::new(0.1, vec![1, 2], vec![0.0]).is_err());
    }

    #[test]
    fn oscillator_state_pins_node_zero() {
        assert!(OscillatorState::new(vec![0.0, 0.3], vec![0.1, -0.1]).is_ok());
        assert!(OscillatorState::new(vec![0.2, 0.3], vec![0.1, -0.1]).is_err());
        assert!(OscillatorState::new(vec![0.0, f64::NAN], vec![0.1, -0.1]).is_err());
    }

    #[test]
    fn condition_number_examples() {
        assert_eq!(condition_number(&Matrix::identity(3)).unwrap(), 1.0);
        assert!((condition_number(&Matrix::from_diagonal(&[10.0, 1.0])).unwrap() - 10.0).abs() < 1e-14);
        let upper = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        // singular values of [[1,1],[0,1]] are the golden ratio and its inverse
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((condition_number(&upper).unwrap() - phi * phi).abs() < 1e-12);
        assert!(matches!(condition_number(&Matrix::zeros(2, 2)), Err(Error::Singular)));
    }
}
