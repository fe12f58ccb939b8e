//! Online equilibrium-propagation training of layered oscillator networks on
//! two-class formant data.
//!
//! Each sample writes its normalized features into the input-node
//! frequencies, solves the free equilibrium, nudges the outputs toward
//! per-class target phases and turns the phase (or coupling) response into
//! an SGD step. Evaluation uses free equilibria only.

use std::f64::consts::PI;

use rand::seq::{index, SliceRandom};
use serde::Serialize;

use crate::data::Sample;
use crate::equilibrium::{self, EquilibriumResult, SolverOptions, PIN};
use crate::error::{Error, Result};
use crate::gradient::{self, LossSpec};
use crate::graph::{CouplingGraph, NodeRole};
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "edges", rename_all = "snake_case")]
pub enum TrainMode {
    OmegaOnly,
    KOnly,
    /// Coupling training restricted to a random subset of this many edges.
    KMatched(usize),
    Joint,
}

impl TrainMode {
    pub fn trains_omega(self) -> bool {
        matches!(self, Self::OmegaOnly | Self::Joint)
    }

    pub fn trains_coupling(self) -> bool {
        !matches!(self, Self::OmegaOnly)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GradientRule {
    TwoPhase,
    /// Centered differences of the loss in each learnable frequency.
    FiniteDifference {
        h: f64,
    },
}

/// How per-sample target phases are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetScheme {
    /// 0 for the correct output and +π for the others, on unwrapped phases.
    Fixed,
    /// As `Fixed`, but each wrong output aims at whichever of ±π lies on
    /// the side of its current free phase.
    NearestBranch,
    /// Only the correct output is nudged, toward 0.
    CorrectOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub rule: GradientRule,
    pub targets: TargetScheme,
    pub lr: f64,
    pub epochs: usize,
    pub beta: f64,
    pub clip: f64,
    pub omega_bounds: (f64, f64),
    pub k_bounds: (f64, f64),
    pub recenter: bool,
    pub seed: u64,
    /// Record `cond(J̃)` over the training set every epoch.
    pub track_condition: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: TrainMode::OmegaOnly,
            rule: GradientRule::TwoPhase,
            targets: TargetScheme::CorrectOnly,
            lr: 1e-3,
            epochs: 150,
            beta: 0.1,
            clip: 2.0,
            omega_bounds: (-3.0, 3.0),
            k_bounds: (0.01, 8.0),
            recenter: false,
            seed: 0,
            track_condition: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return bad(format!("learning rate must be non-negative, got {}", self.lr));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip must be positive, got {}", self.clip));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        for (name, (lo, hi)) in [("omega", self.omega_bounds), ("coupling", self.k_bounds)] {
            if !(lo <= hi) {
                return bad(format!("{name} bounds are empty: [{lo}, {hi}]"));
            }
        }
        if !(self.k_bounds.0 > 0.0) {
            return bad("coupling lower bound must be positive to keep the graph connected".into());
        }
        if let GradientRule::FiniteDifference { h } = self.rule {
            if !(h > 0.0) {
                return bad(format!("finite-difference step must be positive, got {h}"));
            }
            if self.mode.trains_coupling() {
                return bad("the finite-difference rule only trains frequencies".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Model {
    pub graph: CouplingGraph,
    pub omega: Vec<f64>,
    /// Indices into `graph.edges()` that receive coupling updates, ascending.
    pub learnable_edges: Vec<usize>,
    pub mode: TrainMode,
}

impl Model {
    /// `KMatched(m)` draws `m` distinct edges uniformly from `rng`; other
    /// modes leave `rng` untouched.
    pub fn new(graph: CouplingGraph, omega: Vec<f64>, mode: TrainMode, rng: &mut Rng) -> Result<Self> {
        if omega.len() != graph.n() {
            return Err(Error::DimensionMismatch { expected: graph.n(), got: omega.len() });
        }
        if graph.output_nodes().len() < 2 {
            return Err(Error::InvalidParameter("classification needs at least two outputs".into()));
        }
        let n_edges = graph.edges().len();
        let learnable_edges = match mode {
            TrainMode::OmegaOnly => Vec::new(),
            TrainMode::KOnly | TrainMode::Joint => (0..n_edges).collect(),
            TrainMode::KMatched(m) => {
                if m > n_edges {
                    return Err(Error::InvalidParameter(format!("cannot pick {m} of {n_edges} edges")));
                }
                let mut picked = index::sample(rng, n_edges, m).into_vec();
                picked.sort_unstable();
                picked
            }
        };
        Ok(Self { graph, omega, learnable_edges, mode })
    }

    /// Hidden and output nodes when frequencies are trained, otherwise none.
    pub fn learnable_nodes(&self) -> Vec<usize> {
        if !self.mode.trains_omega() {
            return Vec::new();
        }
        (0..self.graph.n()).filter(|&i| self.graph.role(i) != NodeRole::Input).collect()
    }

    /// Frequencies with `features` written into the input nodes.
    pub fn frequencies_for(&self, features: &[f64]) -> Result<Vec<f64>> {
        let inputs = self.graph.input_nodes();
        if features.len() != inputs.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), got: features.len() });
        }
        let mut omega = self.omega.clone();
        for (&node, &x) in inputs.iter().zip(features) {
            omega[node] = x;
        }
        Ok(omega)
    }

    pub fn free_equilibrium(&self, features: &[f64], opts: &SolverOptions) -> Result<EquilibriumResult> {
        equilibrium::solve_with(&self.graph, &self.frequencies_for(features)?, None, None, opts)
    }

    pub fn classify(&self, features: &[f64]) -> Result<Option<usize>> {
        let r = self.free_equilibrium(features, &SolverOptions::fast())?;
        Ok(r.converged.then(|| predict(&r.theta_star, self.graph.output_nodes())))
    }
}

/// Index of the output whose phase has the largest cosine; ties go to the
/// lowest index.
pub fn predict(theta_star: &[f64], outputs: &[usize]) -> usize {
    let mut best = 0;
    let mut best_cos = f64::NEG_INFINITY;
    for (c, &o) in outputs.iter().enumerate() {
        let v = theta_star[o].cos();
        if v > best_cos {
            best_cos = v;
            best = c;
        }
    }
    best
}

/// Target phase 0 for output `class`, π for the others.
pub fn targets_for_class(class: usize, outputs: &[usize]) -> Result<Vec<f64>> {
    if class >= outputs.len() {
        return Err(Error::InvalidParameter(format!("class {class} out of range for {} outputs", outputs.len())));
    }
    Ok((0..outputs.len()).map(|c| if c == class { 0.0 } else { PI }).collect())
}

/// Loss outputs and targets for a sample of `class` given its free phases.
pub fn loss_spec(outputs: &[usize], class: usize, theta_star: &[f64], scheme: TargetScheme) -> Result<LossSpec> {
    let fixed = targets_for_class(class, outputs)?;
    match scheme {
        TargetScheme::Fixed => LossSpec::new(outputs.to_vec(), fixed),
        TargetScheme::NearestBranch => {
            let targets =
                outputs.iter().zip(fixed).map(|(&o, t)| if t != 0.0 && theta_star[o] < 0.0 { -t } else { t }).collect();
            LossSpec::new(outputs.to_vec(), targets)
        }
        TargetScheme::CorrectOnly => LossSpec::new(vec![outputs[class]], vec![0.0]),
    }
}

/// Raw (unclipped) gradients for one sample.
#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct StepGradients {
    /// Per node; zero outside the learnable set.
    pub omega: Vec<f64>,
    /// Per learnable edge, aligned with `Model::learnable_edges`.
    pub coupling: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub skipped: bool,
    /// Free-equilibrium residual (infinity norm).
    pub residual: f64,
    pub loss: f64,
}

/// Gradients for one sample, or `None` when an equilibrium solve fails.
pub fn step_gradients(
    model: &Model,
    sample: &Sample,
    cfg: &TrainConfig,
) -> Result<(Option<StepGradients>, StepDiagnostics)> {
    let g = &model.graph;
    let opts = SolverOptions::fast();
    let omega_c = equilibrium::center_frequencies(&model.frequencies_for(&sample.features)?);
    let free = equilibrium::solve_centered(g, &omega_c, None, None, &opts)?;
    let mut diag = StepDiagnostics { skipped: true, residual: free.residual_inf, loss: f64::NAN };
    if !free.converged {
        return Ok((None, diag));
    }
    let spec = loss_spec(g.output_nodes(), sample.class, &free.theta_star, cfg.targets)?;
    diag.loss = gradient::loss(&free.theta_star, &spec);

    let nodes = model.learnable_nodes();
    let needs_nudge = matches!(cfg.rule, GradientRule::TwoPhase) || model.mode.trains_coupling();
    let nudged = if needs_nudge {
        let nudge = spec.nudge(cfg.beta)?;
        let r = equilibrium::solve_centered(g, &omega_c, Some(&nudge), Some(&free.theta_star), &opts)?;
        if !r.converged {
            return Ok((None, diag));
        }
        Some(r)
    } else {
        None
    };

    let mut omega_grad = vec![0.0; g.n()];
    if !nodes.is_empty() {
        let reduced = match cfg.rule {
            GradientRule::TwoPhase => {
                let nb = nudged.as_ref().expect("two-phase rule solves the nudged state");
                gradient::phase_readout(&free.theta_star, &nb.theta_star, cfg.beta)
            }
            GradientRule::FiniteDifference { h } => {
                let unpinned: Vec<usize> = nodes.iter().copied().filter(|&k| k != PIN).collect();
                match gradient::finite_difference_at(g, &omega_c, &free.theta_star, &spec, h, &unpinned) {
                    Ok(gv) => gv,
                    Err(Error::NotConverged { .. }) => return Ok((None, diag)),
                    Err(e) => return Err(e),
                }
            }
        };
        for &k in &nodes {
            if let Some(r) = equilibrium::reduced_index(k) {
                omega_grad[k] = reduced.values[r];
            }
        }
    }

    let coupling = if model.learnable_edges.is_empty() {
        Vec::new()
    } else {
        let nb = nudged.as_ref().expect("coupling training solves the nudged state");
        let all = gradient::grad_coupling(&free.theta_star, &nb.theta_star, cfg.beta, g.edges());
        model.learnable_edges.iter().map(|&e| all.values[e]).collect()
    };
    diag.skipped = false;
    Ok((Some(StepGradients { omega: omega_grad, coupling }), diag))
}

/// Clip, SGD step, projection and optional recentering.
pub fn apply_gradients(model: &mut Model, grads: &StepGradients, cfg: &TrainConfig) -> Result<()> {
    let clip = |v: f64| v.clamp(-cfg.clip, cfg.clip);
    let nodes = model.learnable_nodes();
    let (wlo, whi) = cfg.omega_bounds;
    for &k in &nodes {
        model.omega[k] = (model.omega[k] - cfg.lr * clip(grads.omega[k])).clamp(wlo, whi);
    }
    if cfg.recenter && !nodes.is_empty() {
        let mean = nodes.iter().map(|&k| model.omega[k]).sum::<f64>() / nodes.len() as f64;
        for &k in &nodes {
            model.omega[k] = (model.omega[k] - mean).clamp(wlo, whi);
        }
    }
    if !model.learnable_edges.is_empty() {
        let (klo, khi) = cfg.k_bounds;
        let mut w = model.graph.weights();
        for (&e, &gk) in model.learnable_edges.iter().zip(&grads.coupling) {
            w[e] = (w[e] - cfg.lr * clip(gk)).clamp(klo, khi);
        }
        model.graph = model.graph.with_weights(&w)?;
    }
    Ok(())
}

pub fn train_step(model: &mut Model, sample: &Sample, cfg: &TrainConfig) -> Result<StepDiagnostics> {
    let (grads, diag) = step_gradients(model, sample, cfg)?;
    if let Some(grads) = grads {
        apply_gradients(model, &grads, cfg)?;
    }
    Ok(diag)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Mean free-equilibrium residual over converged solves.
    pub mean_residual: f64,
    /// Mean `cond(J̃)` over converged solves where it was computable.
    pub mean_cond: Option<f64>,
    /// Population standard deviation of `cond(J̃)` over the same solves.
    pub std_cond: Option<f64>,
    /// Samples whose free solve failed; these count as misclassified.
    pub failures: usize,
}

pub fn evaluate(model: &Model, samples: &[Sample], with_condition: bool) -> Result<Evaluation> {
    let opts = if with_condition { SolverOptions::default() } else { SolverOptions::fast() };
    let outputs = model.graph.output_nodes();
    let (mut correct, mut failures) = (0usize, 0usize);
    let (mut res_sum, mut res_n) = (0.0, 0usize);
    let mut conds = Vec::new();
    for s in samples {
        let r = model.free_equilibrium(&s.features, &opts)?;
        if !r.converged {
            failures += 1;
            continue;
        }
        res_sum += r.residual_inf;
        res_n += 1;
        if let Some(c) = r.jacobian_cond {
            conds.push(c);
        }
        if predict(&r.theta_star, outputs) == s.class {
            correct += 1;
        }
    }
    let accuracy = if samples.is_empty() { 0.0 } else { correct as f64 / samples.len() as f64 };
    let mean_cond = (!conds.is_empty()).then(|| conds.iter().sum::<f64>() / conds.len() as f64);
    let std_cond = mean_cond.map(|m| (conds.iter().map(|c| (c - m).powi(2)).sum::<f64>() / conds.len() as f64).sqrt());
    Ok(Evaluation {
        accuracy,
        mean_residual: if res_n == 0 { f64::NAN } else { res_sum / res_n as f64 },
        mean_cond,
        std_cond,
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 0 is the untrained model.
    pub epoch: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    /// From the training-set evaluation pass.
    pub mean_residual: f64,
    pub mean_cond: Option<f64>,
    pub std_cond: Option<f64>,
    /// Training samples skipped during this epoch.
    pub skips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochRecord>,
    pub final_model: Model,
    pub converged: bool,
}

impl TrainingTrace {
    pub fn last(&self) -> &EpochRecord {
        self.epochs.last().expect("trace holds at least the initial record")
    }

    pub fn final_train_acc(&self) -> f64 {
        self.last().train_acc
    }

    pub fn final_test_acc(&self) -> f64 {
        self.last().test_acc
    }

    pub fn total_skips(&self) -> usize {
        self.epochs.iter().map(|e| e.skips).sum()
    }
}

pub const CONVERGED_TRAIN_ACC: f64 = 0.60;

/// Runs `cfg.epochs` shuffled passes of online updates. The shuffle stream is
/// derived from `cfg.seed`.
pub fn train(mut model: Model, train_set: &[Sample], test_set: &[Sample], cfg: &TrainConfig) -> Result<TrainingTrace> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut shuffle = rng::stream("train", cfg.seed, "shuffle");
    let record = |model: &Model, epoch: usize, skips: usize| -> Result<EpochRecord> {
        let tr = evaluate(model, train_set, cfg.track_condition)?;
        let te = evaluate(model, test_set, false)?;
        Ok(EpochRecord {
            epoch,
            train_acc: tr.accuracy,
            test_acc: te.accuracy,
            mean_residual: tr.mean_residual,
            mean_cond: tr.mean_cond,
            std_cond: tr.std_cond,
            skips,
        })
    };

    let mut epochs = Vec::with_capacity(cfg.epochs + 1);
    epochs.push(record(&model, 0, 0)?);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle);
        let mut skips = 0;
        for &i in &order {
            if train_step(&mut model, &train_set[i], cfg)?.skipped {
                skips += 1;
            }
        }
        epochs.push(record(&model, epoch, skips)?);
    }
    let converged = epochs.last().expect("non-empty").train_acc > CONVERGED_TRAIN_ACC;
    Ok(TrainingTrace { epochs, final_model: model, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split_and_normalize, synthesize_formants, Task};
    use crate::init::random_init;
    use crate::rng::seeded;

    fn model(mode: TrainMode, seed: u64) -> Model {
        let g = CouplingGraph::layered(2, 5, 2, 3.0).unwrap();
        let omega = random_init(&g, 0.3, &mut seeded(seed)).unwrap();
        Model::new(g, omega, mode, &mut seeded(seed + 1000)).unwrap()
    }

    fn data(seed: u64) -> (Vec<Sample>, Vec<Sample>) {
        let ds = synthesize_formants(&Task::new("a", "i").unwrap(), 30, &mut seeded(seed)).unwrap();
        let split = split_and_normalize(&ds, 0.8, &mut seeded(seed + 1)).unwrap();
        (split.train_samples(&ds), split.test_samples(&ds))
    }

    #[test]
    fn predict_examples() {
        let outs = [0, 1];
        assert_eq!(predict(&[0.1, 2.0], &outs), 0);
        assert_eq!(predict(&[PI, 0.0], &outs), 1);
        assert_eq!(predict(&[0.7, 0.7], &outs), 0);
    }

    #[test]
    fn targets_examples() {
        assert_eq!(targets_for_class(0, &[7, 8]).unwrap(), vec![0.0, PI]);
        assert_eq!(targets_for_class(1, &[7, 8]).unwrap(), vec![PI, 0.0]);
        assert!(targets_for_class(2, &[7, 8]).is_err());
        for c in 0..2 {
            let mut theta = vec![0.0; 9];
            for (&o, t) in [7usize, 8].iter().zip(targets_for_class(c, &[7, 8]).unwrap()) {
                theta[o] = t;
            }
            assert_eq!(predict(&theta, &[7, 8]), c);
        }
    }

    #[test]
    fn model_parameter_counts() {
        assert_eq!(model(TrainMode::OmegaOnly, 0).learnable_nodes().len(), 7);
        assert_eq!(model(TrainMode::Joint, 0).learnable_edges.len(), 24);
        assert!(model(TrainMode::KOnly, 0).learnable_nodes().is_empty());
        let m = model(TrainMode::KMatched(7), 0);
        assert_eq!(m.learnable_edges.len(), 7);
        let other = model(TrainMode::KMatched(7), 5);
        assert_ne!(m.learnable_edges, other.learnable_edges);
        let g = CouplingGraph::layered(2, 5, 2, 3.0).unwrap();
        assert!(Model::new(g, vec![0.0; 9], TrainMode::KMatched(25), &mut seeded(0)).is_err());
    }

    #[test]
    fn clipping_and_projection() {
        let mut m = model(TrainMode::OmegaOnly, 1);
        let cfg = TrainConfig { lr: 1.0, ..TrainConfig::default() };
        let before = m.omega.clone();
        let mut grads = StepGradients { omega: vec![0.0; 9], coupling: vec![] };
        grads.omega[2] = 5.0;
        grads.omega[3] = -1.5;
        apply_gradients(&mut m, &grads, &cfg).unwrap();
        assert!((m.omega[2] - (before[2] - 2.0)).abs() < 1e-15);
        assert!((m.omega[3] - (before[3] + 1.5)).abs() < 1e-15);

        m.omega[4] = 2.5;
        grads.omega = vec![0.0; 9];
        grads.omega[4] = -2.0;
        apply_gradients(&mut m, &grads, &cfg).unwrap();
        assert_eq!(m.omega[4], 3.0);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut m = model(TrainMode::Joint, 2);
        let before = m.clone();
        let grads = StepGradients { omega: vec![0.0; 9], coupling: vec![0.0; 24] };
        apply_gradients(&mut m, &grads, &TrainConfig::default()).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn coupling_projection_keeps_floor() {
        let mut m = model(TrainMode::KOnly, 3);
        let cfg = TrainConfig { lr: 10.0, mode: TrainMode::KOnly, ..TrainConfig::default() };
        let grads = StepGradients { omega: vec![0.0; 9], coupling: vec![2.0; 24] };
        apply_gradients(&mut m, &grads, &cfg).unwrap();
        assert!(m.graph.weights().iter().all(|&w| w == 0.01));
    }

    #[test]
    fn modes_are_isolated() {
        let (train_set, _) = data(4);
        for mode in [TrainMode::OmegaOnly, TrainMode::KOnly, TrainMode::KMatched(7)] {
            let mut m = model(mode, 4);
            let start = m.clone();
            let cfg = TrainConfig { mode, lr: 0.05, ..TrainConfig::default() };
            for s in &train_set {
                train_step(&mut m, s, &cfg).unwrap();
            }
            let (w0, w1) = (start.graph.weights(), m.graph.weights());
            match mode {
                TrainMode::OmegaOnly => {
                    assert_eq!(w0, w1);
                    assert_ne!(start.omega, m.omega);
                }
                _ => {
                    assert_eq!(start.omega, m.omega);
                    for e in 0..24 {
                        if !m.learnable_edges.contains(&e) {
                            assert_eq!(w0[e], w1[e]);
                        }
                    }
                    assert_ne!(w0, w1);
                }
            }
        }
    }

    #[test]
    fn zero_learning_rate_freezes_accuracy() {
        let (train_set, test_set) = data(6);
        let cfg = TrainConfig { lr: 0.0, epochs: 3, ..TrainConfig::default() };
        let trace = train(model(TrainMode::OmegaOnly, 6), &train_set, &test_set, &cfg).unwrap();
        assert_eq!(trace.epochs.len(), 4);
        let first = trace.epochs[0];
        for e in &trace.epochs {
            assert_eq!(e.train_acc, first.train_acc);
            assert_eq!(e.test_acc, first.test_acc);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (train_set, test_set) = data(7);
        let cfg = TrainConfig { epochs: 2, lr: 0.01, mode: TrainMode::Joint, seed: 9, ..TrainConfig::default() };
        let a = train(model(TrainMode::Joint, 7), &train_set, &test_set, &cfg).unwrap();
        let b = train(model(TrainMode::Joint, 7), &train_set, &test_set, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finite_difference_rule_tracks_two_phase() {
        let (train_set, _) = data(8);
        let m = model(TrainMode::OmegaOnly, 8);
        let tp = TrainConfig { beta: 1e-4, ..TrainConfig::default() };
        let fd = TrainConfig { rule: GradientRule::FiniteDifference { h: 1e-5 }, ..tp };
        let (a, _) = step_gradients(&m, &train_set[0], &tp).unwrap();
        let (b, _) = step_gradients(&m, &train_set[0], &fd).unwrap();
        let cos = gradient::cosine_similarity(&a.unwrap().omega, &b.unwrap().omega).unwrap();
        assert!(cos > 0.9999, "{cos}");
    }

    #[test]
    fn target_schemes() {
        let theta = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.2, 0.1];
        let outs = [7, 8];
        let fixed = loss_spec(&outs, 0, &theta, TargetScheme::Fixed).unwrap();
        assert_eq!(fixed.targets, vec![0.0, PI]);
        let near = loss_spec(&outs, 1, &theta, TargetScheme::NearestBranch).unwrap();
        assert_eq!(near.targets, vec![-PI, 0.0]);
        let near = loss_spec(&outs, 0, &theta, TargetScheme::NearestBranch).unwrap();
        assert_eq!(near.targets, vec![0.0, PI]);
        let only = loss_spec(&outs, 1, &theta, TargetScheme::CorrectOnly).unwrap();
        assert_eq!((only.outputs, only.targets), (vec![8], vec![0.0]));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { clip: 0.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { omega_bounds: (1.0, -1.0), ..TrainConfig::default() }.validate().is_err());
        let fd_k = TrainConfig {
            mode: TrainMode::KOnly,
            rule: GradientRule::FiniteDifference { h: 1e-5 },
            ..TrainConfig::default()
        };
        assert!(fd_k.validate().is_err());
    }
}
