//! Experiment drivers behind the `phasegrad` binary.
//!
//! Every subcommand produces an [`output::ExperimentResult`]: a JSON
//! envelope with a schema version, the fully resolved configuration, one
//! record per seed (or per seed and arm), aggregate summaries and the
//! wall-clock time. Everything except the wall-clock time is a pure
//! function of the flags.

pub mod common;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};

use experiments::*;
use output::ExperimentResult;

#[derive(Parser, Debug)]
#[command(name = "phasegrad", version, about = "Gradient checks and training experiments for oscillator networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Two-phase, analytical and finite-difference gradients on random networks.
    Verify(verify::VerifyArgs),
    /// Gradient agreement under non-reciprocal coupling.
    Asymmetry(asymmetry::AsymmetryArgs),
    /// Two-phase bias as a function of the nudging strength.
    FiniteBeta(finite_beta::FiniteBetaArgs),
    /// Frequency, coupling and joint training compared.
    Ablate(ablate::AblateArgs),
    /// Frequency-only against coupling-only across hidden sizes.
    Sweep(sweep::SweepArgs),
    /// Conditioning of converged and failed seeds, and converged-set stability.
    ConvergeDiag(converge_diag::ConvergeDiagArgs),
    /// Random, spectral, output-only and multi-start initialization.
    Spectral(spectral::SpectralArgs),
    /// Paired two-phase and finite-difference training.
    GradRule(grad_rule::GradRuleArgs),
    /// Logistic-regression reference accuracy.
    Baseline(baseline::BaselineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Verify(_) => "verify",
            Self::Asymmetry(_) => "asymmetry",
            Self::FiniteBeta(_) => "finite-beta",
            Self::Ablate(_) => "ablate",
            Self::Sweep(_) => "sweep",
            Self::ConvergeDiag(_) => "converge-diag",
            Self::Spectral(_) => "spectral",
            Self::GradRule(_) => "grad-rule",
            Self::Baseline(_) => "baseline",
        }
    }

    pub fn out(&self) -> Option<&Path> {
        let common = match self {
            Self::Verify(a) => &a.common,
            Self::Asymmetry(a) => &a.common,
            Self::FiniteBeta(a) => &a.common,
            Self::Ablate(a) => &a.common,
            Self::Sweep(a) => &a.common,
            Self::ConvergeDiag(a) => &a.common,
            Self::Spectral(a) => &a.common,
            Self::GradRule(a) => &a.common,
            Self::Baseline(a) => &a.common,
        };
        common.out.as_deref()
    }

    pub fn execute(&self) -> Result<ExperimentResult> {
        let start = Instant::now();
        let name = self.name();
        let secs = || start.elapsed().as_secs_f64();
        match self {
            Self::Verify(a) => verify::run(a)?.into_result(name, secs()),
            Self::Asymmetry(a) => asymmetry::run(a)?.into_result(name, secs()),
            Self::FiniteBeta(a) => finite_beta::run(a)?.into_result(name, secs()),
            Self::Ablate(a) => ablate::run(a)?.into_result(name, secs()),
            Self::Sweep(a) => sweep::run(a)?.into_result(name, secs()),
            Self::ConvergeDiag(a) => converge_diag::run(a)?.into_result(name, secs()),
            Self::Spectral(a) => spectral::run(a)?.into_result(name, secs()),
            Self::GradRule(a) => grad_rule::run(a)?.into_result(name, secs()),
            Self::Baseline(a) => baseline::run(a)?.into_result(name, secs()),
        }
    }
}
