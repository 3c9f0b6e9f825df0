//! Observations in the Gaussian sequence model and the discretized white-noise path.
//!
//! The sequence model observes, for `k = 1..K`,
//! `x_k = f_k cos(2πkθ) + ε ξ_k` and `x_k* = f_k sin(2πkθ) + ε ξ_k*`.
//! Gaussian draws are consumed in a fixed order: `k` ascending, `ξ_k` before `ξ_k*`.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::std_normal;
use crate::signal::FourierSignal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservation")]
pub struct Observation {
    eps: f64,
    x: Vec<f64>,
    xs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawObservation {
    eps: f64,
    x: Vec<f64>,
    xs: Vec<f64>,
}

impl TryFrom<RawObservation> for Observation {
    type Error = Error;

    fn try_from(raw: RawObservation) -> Result<Self> {
        Observation::new(raw.eps, raw.x, raw.xs)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("eps", format!("must be positive and finite, got {eps}")));
    }
    Ok(())
}

impl Observation {
    pub fn new(eps: f64, x: Vec<f64>, xs: Vec<f64>) -> Result<Self> {
        check_eps(eps)?;
        if x.is_empty() {
            return Err(Error::param("x", "at least one coefficient pair is required"));
        }
        if x.len() != xs.len() {
            return Err(Error::Dimension(format!(
                "x has {} entries but xs has {}",
                x.len(),
                xs.len()
            )));
        }
        Ok(Self { eps, x, xs })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Number of stored coefficient pairs `K`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `x_k² + x_k*²` for `k = 1..K`.
    pub fn magnitudes_sq(&self) -> impl Iterator<Item = f64> + '_ {
        self.x.iter().zip(&self.xs).map(|(a, b)| a * a + b * b)
    }

    /// Same data with `x_k*` negated, i.e. the observation of the mirrored signal.
    pub fn mirrored(&self) -> Self {
        Self {
            eps: self.eps,
            x: self.x.clone(),
            xs: self.xs.iter().map(|v| -v).collect(),
        }
    }

    /// Coefficients expressed in the frame centred at `tau`:
    /// `x_k(τ) = x_k cos 2πkτ + x_k* sin 2πkτ`, `x_k*(τ) = −x_k sin 2πkτ + x_k* cos 2πkτ`.
    pub fn rotate_frame(&self, tau: f64) -> Self {
        let (x, xs) = self
            .x
            .iter()
            .zip(&self.xs)
            .enumerate()
            .map(|(i, (&a, &b))| {
                let (s, c) = (2.0 * PI * (i + 1) as f64 * tau).sin_cos();
                (a * c + b * s, -a * s + b * c)
            })
            .unzip();
        Self { eps: self.eps, x, xs }
    }

    /// Writes `k,x,xs` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,x,xs")?;
        for (i, (a, b)) in self.x.iter().zip(&self.xs).enumerate() {
            writeln!(out, "{},{},{}", i + 1, a, b)?;
        }
        Ok(())
    }
}

/// Builds an observation from explicit standard-normal draws laid out as
/// `[ξ_1, ξ_1*, ξ_2, ξ_2*, ...]` (length `2K`).
pub fn sequence_from_draws(
    f: &FourierSignal,
    theta: f64,
    eps: f64,
    draws: &[f64],
) -> Result<Observation> {
    check_eps(eps)?;
    if draws.is_empty() || draws.len() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "expected 2K draws with K ≥ 1, got {}",
            draws.len()
        )));
    }
    let (x, xs) = draws
        .chunks_exact(2)
        .enumerate()
        .map(|(i, pair)| {
            let k = i + 1;
            let (s, c) = (2.0 * PI * k as f64 * theta).sin_cos();
            let fk = f.coeff(k);
            (fk * c + eps * pair[0], fk * s + eps * pair[1])
        })
        .unzip();
    Observation::new(eps, x, xs)
}

/// Simulates `K` coefficient pairs of the sequence model at shift `theta`.
pub fn simulate_sequence<R: Rng + ?Sized>(
    f: &FourierSignal,
    theta: f64,
    eps: f64,
    len: usize,
    rng: &mut R,
) -> Result<Observation> {
    check_eps(eps)?;
    if len < 1 {
        return Err(Error::param("K", "must be at least 1"));
    }
    let draws: Vec<f64> = (0..2 * len).map(|_| std_normal(rng)).collect();
    sequence_from_draws(f, theta, eps, &draws)
}

/// Noiseless observation labelled with noise level `eps` (all draws set to zero).
#[doc(hidden)]
pub fn drift_only(f: &FourierSignal, theta: f64, eps: f64, len: usize) -> Result<Observation> {
    if len < 1 {
        return Err(Error::param("K", "must be at least 1"));
    }
    sequence_from_draws(f, theta, eps, &vec![0.0; 2 * len])
}

/// Increments of `dx(t) = f(t − θ) dt + ε dW(t)` over `M` uniform cells of `[−1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    eps: f64,
    increments: Vec<f64>,
}

impl PathSample {
    pub fn new(eps: f64, increments: Vec<f64>) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::param("eps", "must be nonnegative and finite"));
        }
        if increments.len() < 2 {
            return Err(Error::param("M", "at least two cells are required"));
        }
        Ok(Self { eps, increments })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn cells(&self) -> usize {
        self.increments.len()
    }

    /// Midpoint of cell `i`.
    pub fn midpoint(&self, i: usize) -> f64 {
        cell_midpoint(i, self.cells())
    }

    /// Riemann–Stieltjes coefficients `x_k = √2 Σ_i cos(2πk t_i) Δx_i` (sine analog for `x_k*`).
    pub fn extract_coefficients(&self, len: usize) -> Result<Observation> {
        let m = self.cells();
        if len < 1 || 4 * len > m {
            return Err(Error::param(
                "K",
                format!("need 1 ≤ K ≤ M/4, got K = {len} with M = {m}"),
            ));
        }
        let (x, xs) = (1..=len)
            .map(|k| {
                let (mut c_sum, mut s_sum) = (0.0, 0.0);
                for (i, inc) in self.increments.iter().enumerate() {
                    let (s, c) = (2.0 * PI * k as f64 * self.midpoint(i)).sin_cos();
                    c_sum += c * inc;
                    s_sum += s * inc;
                }
                (SQRT_2 * c_sum, SQRT_2 * s_sum)
            })
            .unzip();
        // a noiseless path carries eps = 0; keep the observation contract
        Observation::new(self.eps.max(f64::MIN_POSITIVE), x, xs)
    }
}

fn cell_midpoint(i: usize, m: usize) -> f64 {
    -0.5 + (i as f64 + 0.5) / m as f64
}

fn path_with_noise_scale<R: Rng + ?Sized>(
    f: &FourierSignal,
    theta: f64,
    eps: f64,
    cells: usize,
    rng: &mut R,
) -> Result<PathSample> {
    if cells < 2 {
        return Err(Error::param("M", "at least two cells are required"));
    }
    let width = 1.0 / cells as f64;
    let noise_sd = eps * width.sqrt();
    let increments = (0..cells)
        .map(|i| {
            let drift = f.eval(cell_midpoint(i, cells) - theta) * width;
            if noise_sd > 0.0 {
                drift + noise_sd * std_normal(rng)
            } else {
                drift
            }
        })
        .collect();
    PathSample::new(eps, increments)
}

/// Euler discretization of the white-noise path with midpoint drift.
pub fn simulate_path<R: Rng + ?Sized>(
    f: &FourierSignal,
    theta: f64,
    eps: f64,
    cells: usize,
    rng: &mut R,
) -> Result<PathSample> {
    check_eps(eps)?;
    path_with_noise_scale(f, theta, eps, cells, rng)
}

/// Drift-only path (`ε = 0`).
#[doc(hidden)]
pub fn drift_only_path(f: &FourierSignal, theta: f64, cells: usize) -> Result<PathSample> {
    let mut unused = crate::rng::substream(0, 0);
    path_with_noise_scale(f, theta, 0.0, cells, &mut unused)
}
