//! Randomized invariants.

use proptest::prelude::*;
use rand::Rng as _;

use phasegrad_core::data::{self, Dataset, FormantSample, Task};
use phasegrad_core::equilibrium::{self, SolverOptions};
use phasegrad_core::gradient::{self, LossSpec};
use phasegrad_core::graph::{self, CouplingGraph};
use phasegrad_core::init::{self, SeedSpec};
use phasegrad_core::linalg::Cholesky;
use phasegrad_core::rng;
use phasegrad_core::stats::{self, SeedOutcome};

fn network(n: usize, seed: u64, spread: f64) -> (CouplingGraph, Vec<f64>, LossSpec) {
    let mut r = rng::seeded(seed);
    let g = CouplingGraph::erdos_renyi(n, 0.6, 5.0, &mut r).unwrap();
    let omega = (0..n).map(|_| r.random_range(-spread..spread)).collect();
    let spec = LossSpec::new(vec![n - 2, n - 1], vec![r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)]).unwrap();
    (g, omega, spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equilibria_converge_and_ignore_frequency_offsets(n in 4usize..20, seed in any::<u64>(), shift in -2.0f64..2.0) {
        let (g, omega, _) = network(n, seed, 0.4);
        let a = equilibrium::solve(&g, &omega, None, None).unwrap();
        prop_assert!(a.converged);
        prop_assert!(a.residual_inf <= 1e-12);
        let shifted: Vec<f64> = omega.iter().map(|w| w + shift).collect();
        let b = equilibrium::solve(&g, &shifted, None, None).unwrap();
        for (x, y) in a.theta_star.iter().zip(&b.theta_star) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn two_phase_tracks_analytical(n in 4usize..16, seed in any::<u64>()) {
        let (g, omega, spec) = network(n, seed, 0.3);
        let tp = gradient::grad_two_phase(&g, &omega, &spec, 1e-5).unwrap();
        let an = gradient::grad_analytical(&g, &omega, &spec).unwrap();
        prop_assert!(gradient::cosine_similarity(&tp.values, &an.values).unwrap() > 0.99999);
    }

    #[test]
    fn reduced_laplacian_of_connected_graph_is_spd(n in 2usize..25, seed in any::<u64>()) {
        let g = CouplingGraph::erdos_renyi(n, 0.5, 2.0, &mut rng::seeded(seed)).unwrap();
        let l = graph::laplacian(&g, &g.weights()).unwrap();
        for i in 0..n {
            prop_assert!(l.row(i).iter().sum::<f64>().abs() < 1e-12);
        }
        prop_assert!(Cholesky::factor(&graph::reduce(&l, 0).unwrap()).is_some());
    }

    #[test]
    fn spectral_seed_is_bounded_and_antisymmetric(hidden in 1usize..10, seed in any::<u64>()) {
        let base = CouplingGraph::layered(2, hidden, 2, 3.0).unwrap();
        let mut r = rng::seeded(seed);
        let w: Vec<f64> = base.edges().iter().map(|_| r.random_range(0.5..5.0)).collect();
        let g = base.with_weights(&w).unwrap();
        let outs = g.output_nodes().to_vec();
        let a = init::spectral_seed(&g, &SeedSpec::new(0.3, outs[0], outs[1]).unwrap()).unwrap();
        let b = init::spectral_seed(&g, &SeedSpec::new(0.3, outs[1], outs[0]).unwrap()).unwrap();
        let max = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((max - 0.3).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x + y).abs() < 1e-12);
        }
        prop_assert!(g.input_nodes().iter().all(|&i| a[i] == 0.0));
    }

    #[test]
    fn welch_is_swap_symmetric(a in prop::collection::vec(-5.0f64..5.0, 2..30), b in prop::collection::vec(-5.0f64..5.0, 2..30)) {
        if let (Ok(x), Ok(y)) = (stats::welch_t_test(&a, &b), stats::welch_t_test(&b, &a)) {
            prop_assert!((x.t + y.t).abs() < 1e-9 * (1.0 + x.t.abs()));
            prop_assert!((x.p - y.p).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x.p));
        }
    }

    #[test]
    fn fisher_p_is_a_probability_and_swap_invariant(a in 0u64..40, b in 0u64..40, c in 0u64..40, d in 0u64..40) {
        let p = stats::fisher_exact_2x2([[a, b], [c, d]]);
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!((p - stats::fisher_exact_2x2([[d, c], [b, a]])).abs() < 1e-9);
        prop_assert!((p - stats::fisher_exact_2x2([[a, c], [b, d]])).abs() < 1e-9);
    }

    #[test]
    fn all_seed_mean_is_weighted_combination(accs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..50)) {
        let outs: Vec<SeedOutcome> = accs.iter().map(|&(tr, te)| SeedOutcome { final_train_acc: tr, final_test_acc: te }).collect();
        let s = stats::summarize(&outs, 0.6);
        prop_assert!(s.n_converged <= s.n_seeds);
        let all = s.all_seed_mean_acc.unwrap();
        prop_assert!((0.0..=1.0).contains(&all));
        let nc = s.n_converged as f64;
        let nf = (s.n_seeds - s.n_converged) as f64;
        let combined = (nc * s.converged_mean_acc.unwrap_or(0.0) + nf * s.failed_mean_acc.unwrap_or(0.0)) / s.n_seeds as f64;
        prop_assert!((combined - all).abs() < 1e-12);
    }

    #[test]
    fn normalization_uses_training_rows_only(seed in any::<u64>(), outlier in 1e4f64..1e6) {
        let task = Task::parse("a-i").unwrap();
        let mut ds = data::synthesize_formants(&task, 30, &mut rng::seeded(seed)).unwrap();
        let split = data::split_and_normalize(&ds, 0.8, &mut rng::seeded(seed ^ 1)).unwrap();
        let test_idx = split.test[0];
        let mut samples = ds.samples.clone();
        samples[test_idx] = FormantSample { f1: outlier, f2: outlier, ..samples[test_idx].clone() };
        ds = Dataset::new(samples, task).unwrap();
        let again = data::split_and_normalize(&ds, 0.8, &mut rng::seeded(seed ^ 1)).unwrap();
        prop_assert_eq!(&split.train, &again.train);
        prop_assert_eq!(split.mean, again.mean);
        prop_assert_eq!(split.std, again.std);
        let train = again.train_samples(&ds);
        for k in 0..2 {
            let m = train.iter().map(|s| s.features[k]).sum::<f64>() / train.len() as f64;
            let v = train.iter().map(|s| (s.features[k] - m).powi(2)).sum::<f64>() / train.len() as f64;
            prop_assert!(m.abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn condition_numbers_are_at_least_one() {
    for seed in 0..10 {
        let (g, omega, _) = network(8, seed, 0.4);
        let opts = SolverOptions::default();
        let res = equilibrium::solve_with(&g, &omega, None, None, &opts).unwrap();
        assert!(res.jacobian_cond.unwrap() >= 1.0);
    }
}
