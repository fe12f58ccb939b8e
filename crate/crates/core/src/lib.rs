//! Equilibrium propagation for Kuramoto oscillator networks with natural
//! frequencies as the learnable parameters.
//!
//! At a stable phase-locked equilibrium, weakly nudging the output
//! oscillators toward their targets displaces every phase by (minus) the
//! loss gradient with respect to that oscillator's mean-centered natural
//! frequency. This crate solves the equilibria, reads gradients out of the
//! phase displacement, checks them against implicit differentiation and
//! finite differences, and trains small layered networks with them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod equilibrium;
pub mod error;
pub mod gradient;
pub mod graph;
pub mod init;
pub mod learning;
pub mod linalg;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
