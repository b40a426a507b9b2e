//! Parameter estimation for single- and multi-component chirp signals
//! observed in symmetric α-stable noise.
//!
//! The signal model is
//!
//! ```text
//! y(t) = Σ_k [ A_k cos(θ1_k t + θ2_k t²) + B_k sin(θ1_k t + θ2_k t²) ] + e(t),   t = 1..n
//! ```
//!
//! Two estimators are provided:
//!
//! - the least squares estimator (LSE), which profiles the linear amplitudes
//!   out of the residual sum of squares and minimizes over the nonlinear
//!   frequency / frequency-rate pairs;
//! - the approximate least squares estimator (ALSE), which maximizes the
//!   chirp periodogram and recovers amplitudes by projection sums.
//!
//! Alongside the estimators the crate carries the asymptotic machinery
//! (scaling matrices, the limiting Hessian and its inverse, the limiting
//! stable characteristic function) and a reproducible Monte Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod model;
pub mod montecarlo;
pub mod noise;
pub mod optim;

pub use error::{Error, Result};
pub use estimators::{EstimationResult, Method};
pub use model::{ChirpComponent, ChirpModel, SampleSeries};
pub use noise::StableNoiseSpec;
