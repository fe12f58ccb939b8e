//! Natural-frequency initializations: random, spectral seeding from the
//! reduced Laplacian, output-only, and multi-start screening.

use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::equilibrium::{self, SolverOptions, PIN};
use crate::error::{Error, Result};
use crate::graph::{self, eig_symmetric, CouplingGraph};
use crate::rng::Rng;

pub const DEFAULT_ALPHA_MAX: f64 = 0.3;

/// Mode separations below this are treated as zero.
const SEPARATION_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedSpec {
    pub alpha_max: f64,
    pub out1: usize,
    pub out2: usize,
}

impl SeedSpec {
    pub fn new(alpha_max: f64, out1: usize, out2: usize) -> Result<Self> {
        if !(alpha_max > 0.0) || !alpha_max.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha_max must be positive, got {alpha_max}")));
        }
        if out1 == out2 {
            return Err(Error::InvalidParameter("seed outputs must differ".into()));
        }
        Ok(Self { alpha_max, out1, out2 })
    }

    /// Default scale with the graph's first two outputs.
    pub fn for_graph(g: &CouplingGraph) -> Result<Self> {
        match g.output_nodes() {
            [a, b, ..] => Self::new(DEFAULT_ALPHA_MAX, *a, *b),
            _ => Err(Error::InvalidParameter("spectral seeding needs two output nodes".into())),
        }
    }
}

fn reduced_index(node: usize) -> Result<usize> {
    equilibrium::reduced_index(node).ok_or(Error::PinnedOutput(node))
}

/// `ω_k ∝ Σ_i (s_i/λ_i)[v_i]_k` over all modes of the reduced Laplacian,
/// with `s_i = [v_i]_out1 − [v_i]_out2`, input entries zeroed and the result
/// scaled so that `max |ω| = alpha_max`.
pub fn spectral_seed(g: &CouplingGraph, spec: &SeedSpec) -> Result<Vec<f64>> {
    let n = g.n();
    if spec.out1 >= n || spec.out2 >= n {
        return Err(Error::InvalidParameter(format!("output index out of range for {n} nodes")));
    }
    let (r1, r2) = (reduced_index(spec.out1)?, reduced_index(spec.out2)?);
    let l = graph::laplacian(g, &g.weights())?;
    let decomp = eig_symmetric(&graph::reduce(&l, PIN)?)?;
    if decomp.eigenvalues.first().is_none_or(|&lo| lo <= 0.0) {
        return Err(Error::Disconnected);
    }

    let mut reduced = vec![0.0; n - 1];
    let mut any_separation = false;
    for (i, &lambda) in decomp.eigenvalues.iter().enumerate() {
        let mut v = decomp.eigenvector(i);
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let s = v[r1] - v[r2];
        if s.abs() > SEPARATION_EPS {
            any_separation = true;
        }
        for (acc, vk) in reduced.iter_mut().zip(&v) {
            *acc += s / lambda * vk;
        }
    }
    if !any_separation {
        return Err(Error::IndistinguishableOutputs);
    }

    let mut omega = vec![0.0; n];
    for (k, val) in reduced.into_iter().enumerate() {
        let node = equilibrium::node_index(k);
        omega[node] = val;
    }
    for &i in g.input_nodes() {
        omega[i] = 0.0;
    }
    let peak = omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if peak <= SEPARATION_EPS {
        return Err(Error::IndistinguishableOutputs);
    }
    let alpha = spec.alpha_max / peak;
    Ok(omega.into_iter().map(|w| w * alpha).collect())
}

/// Hidden and output frequencies drawn from `N(0, sigma²)` in node order;
/// input entries are 0.
pub fn random_init(g: &CouplingGraph, sigma: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
    }
    let dist = Normal::new(0.0, sigma).expect("validated sigma");
    let mut omega = vec![0.0; g.n()];
    for (i, w) in omega.iter_mut().enumerate() {
        if g.role(i) != graph::NodeRole::Input {
            *w = dist.sample(rng);
        }
    }
    Ok(omega)
}

/// `+magnitude` on the first output, `−magnitude` on the second, 0 elsewhere.
pub fn output_only_init(g: &CouplingGraph, magnitude: f64) -> Result<Vec<f64>> {
    let spec = SeedSpec::for_graph(g)?;
    let mut omega = vec![0.0; g.n()];
    omega[spec.out1] = magnitude;
    omega[spec.out2] = -magnitude;
    Ok(omega)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreenResult {
    pub omega: Vec<f64>,
    /// `|θ*_out1 − θ*_out2|` per candidate; `None` when the free solve failed.
    pub scores: Vec<Option<f64>>,
    pub chosen: usize,
}

/// Draws `n_starts` random initializations and keeps the one whose free
/// equilibrium (inputs at zero) separates the two outputs most.
pub fn multi_start_screen(g: &CouplingGraph, n_starts: usize, sigma: f64, rng: &mut Rng) -> Result<ScreenResult> {
    if n_starts == 0 {
        return Err(Error::InvalidParameter("n_starts must be positive".into()));
    }
    let spec = SeedSpec::for_graph(g)?;
    let opts = SolverOptions::fast();
    let mut candidates = Vec::with_capacity(n_starts);
    let mut scores = Vec::with_capacity(n_starts);
    for _ in 0..n_starts {
        let omega = random_init(g, sigma, rng)?;
        let score = equilibrium::solve_with(g, &omega, None, None, &opts)
            .ok()
            .filter(|r| r.converged)
            .map(|r| (r.theta_star[spec.out1] - r.theta_star[spec.out2]).abs());
        candidates.push(omega);
        scores.push(score);
    }
    let mut chosen = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if s > best {
                best = s;
                chosen = i;
            }
        }
    }
    Ok(ScreenResult { omega: candidates.swap_remove(chosen), scores, chosen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn net() -> CouplingGraph {
        CouplingGraph::layered(2, 5, 2, 3.0).unwrap()
    }

    #[test]
    fn spectral_seed_is_normalized_and_input_free() {
        let g = net();
        let omega = spectral_seed(&g, &SeedSpec::for_graph(&g).unwrap()).unwrap();
        let peak = omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        assert!((peak - 0.3).abs() < 1e-15);
        for &i in g.input_nodes() {
            assert_eq!(omega[i], 0.0);
        }
    }

    #[test]
    fn swapping_outputs_negates_seed() {
        let g = net();
        let s = SeedSpec::for_graph(&g).unwrap();
        let a = spectral_seed(&g, &s).unwrap();
        let b = spectral_seed(&g, &SeedSpec::new(0.3, s.out2, s.out1).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn seed_invariant_to_uniform_rescale() {
        let g = net();
        let s = SeedSpec::for_graph(&g).unwrap();
        let a = spectral_seed(&g, &s).unwrap();
        let scaled: Vec<f64> = g.weights().iter().map(|w| w * 7.5).collect();
        let b = spectral_seed(&g.with_weights(&scaled).unwrap(), &s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn output_symmetric_layered_seed_lives_on_outputs() {
        // With outputs exchangeable and the pin fixed by the exchange, the
        // seed is antisymmetric and vanishes on every non-output node.
        let g = net();
        let seed = spectral_seed(&g, &SeedSpec::for_graph(&g).unwrap()).unwrap();
        let oo = output_only_init(&g, 0.3).unwrap();
        for (x, y) in seed.iter().zip(&oo) {
            assert!((x - y).abs() < 1e-12, "{seed:?}");
        }
    }

    #[test]
    fn non_uniform_weights_reach_hidden_nodes() {
        let g = net();
        let w: Vec<f64> = (0..g.edges().len()).map(|i| 1.0 + 0.1 * i as f64).collect();
        let g = g.with_weights(&w).unwrap();
        let seed = spectral_seed(&g, &SeedSpec::for_graph(&g).unwrap()).unwrap();
        assert!(g.hidden_nodes().iter().any(|&h| seed[h].abs() > 1e-6));
    }

    #[test]
    fn pinned_or_invalid_outputs_rejected() {
        let g = net();
        assert!(matches!(spectral_seed(&g, &SeedSpec::new(0.3, 0, 7).unwrap()), Err(Error::PinnedOutput(0))));
        assert!(SeedSpec::new(0.3, 7, 7).is_err());
        assert!(SeedSpec::new(0.0, 7, 8).is_err());
    }

    #[test]
    fn star_outputs_take_opposite_extremes() {
        let g = CouplingGraph::new(
            3,
            vec![],
            vec![0],
            vec![1, 2],
            vec![graph::Edge { i: 0, j: 1, weight: 1.0 }, graph::Edge { i: 0, j: 2, weight: 1.0 }],
        )
        .unwrap();
        let omega = spectral_seed(&g, &SeedSpec::new(0.3, 1, 2).unwrap()).unwrap();
        assert_eq!(omega[0], 0.0);
        assert!((omega[1] - 0.3).abs() < 1e-15 && (omega[2] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn random_init_respects_roles() {
        let g = net();
        assert!(random_init(&g, 0.0, &mut seeded(1)).unwrap().iter().all(|&w| w == 0.0));
        let a = random_init(&g, 0.3, &mut seeded(4)).unwrap();
        assert_eq!(a, random_init(&g, 0.3, &mut seeded(4)).unwrap());
        assert_eq!(a[0], 0.0);
        assert_eq!(a[1], 0.0);
        assert!(a[2..].iter().all(|&w| w != 0.0));
    }

    #[test]
    fn random_init_variance() {
        let g = CouplingGraph::layered(1, 1, 2, 1.0).unwrap();
        let mut rng = seeded(11);
        let draws: Vec<f64> = (0..10_000).map(|_| random_init(&g, 0.3, &mut rng).unwrap()[1]).collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((var / 0.09 - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn output_only_shape() {
        let g = net();
        let o = output_only_init(&g, 0.3).unwrap();
        assert_eq!(o.iter().filter(|&&w| w != 0.0).count(), 2);
        assert!(output_only_init(&g, 0.0).unwrap().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn screen_single_start_matches_random_init() {
        let g = net();
        let r = multi_start_screen(&g, 1, 0.3, &mut seeded(3)).unwrap();
        assert_eq!(r.omega, random_init(&g, 0.3, &mut seeded(3)).unwrap());
        assert_eq!(r.chosen, 0);
        assert!(multi_start_screen(&g, 0, 0.3, &mut seeded(3)).is_err());
    }

    #[test]
    fn screen_picks_maximum_score() {
        let g = net();
        let r = multi_start_screen(&g, 10, 0.3, &mut seeded(8)).unwrap();
        let best = r.scores[r.chosen].unwrap();
        assert!(r.scores.iter().flatten().all(|&s| s <= best));
    }
}
