//! Shift estimation for a symmetric periodic signal observed in Gaussian white noise.
//!
//! The pipeline works in the Fourier sequence model: a signal is a finite set of
//! cosine coefficients ([`signal`]), observations are noisy rotated coefficient
//! pairs ([`noise`]), a weakly geometric block scheme ([`blocks`]) supports a
//! penalized blockwise Stein filter ([`filters`]), and the shift is estimated by
//! locally maximizing the filtered profile likelihood ([`estimator`]).
//! [`experiments`] holds the Monte Carlo harness and deterministic checks.

#![forbid(unsafe_code)]

pub mod blocks;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod filters;
pub mod noise;
pub mod rng;
pub mod signal;

pub use blocks::BlockScheme;
pub use error::{Error, Result};
pub use estimator::{estimate, EstimateOptions, EstimateReport};
pub use filters::Filter;
pub use noise::{Observation, PathSample};
pub use signal::FourierSignal;

use std::f64::consts::PI;

/// Angular frequency `2πk` of the k-th harmonic.
#[inline]
pub(crate) fn omega(k: usize) -> f64 {
    2.0 * PI * k as f64
}
