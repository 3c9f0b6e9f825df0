//! Symmetric 1-periodic signals stored as cosine coefficients.
//!
//! A signal is `f(t) = Σ_k √2 f_k cos(2πkt)` for `k = 1..K`. Coefficients beyond
//! `K` are zero, so every norm below is an exact finite sum.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::omega;

/// Names accepted by [`FourierSignal::preset`].
pub const PRESET_NAMES: &[&str] = &["single", "fixture", "poly"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignal")]
pub struct FourierSignal {
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSignal {
    coeffs: Vec<f64>,
}

impl TryFrom<RawSignal> for FourierSignal {
    type Error = Error;

    fn try_from(raw: RawSignal) -> Result<Self> {
        FourierSignal::new(raw.coeffs)
    }
}

/// Result of [`FourierSignal::class_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMembership {
    /// `|f_1| ≥ ρ`.
    pub first_harmonic_ok: bool,
    /// `Σ (2πk)^{2β*} f_k² ≤ L*²`.
    pub sobolev_ok: bool,
    pub sobolev_norm_sq: f64,
}

impl ClassMembership {
    pub fn in_both(&self) -> bool {
        self.first_harmonic_ok && self.sobolev_ok
    }
}

impl FourierSignal {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", "at least one coefficient is required"));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", format!("f_{} is not finite", k + 1)));
        }
        Ok(Self { coeffs })
    }

    /// The zero signal with `k` stored coefficients.
    pub fn zero(k: usize) -> Result<Self> {
        Self::new(vec![0.0; k])
    }

    /// `f_k = c · k^{-(β + 0.55)}` for `k = 1..K`: sits just inside the Sobolev ball of order β.
    pub fn polynomial_decay(scale: f64, beta: f64, len: usize) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::param("beta", "must be positive"));
        }
        let coeffs = (1..=len)
            .map(|k| scale * (k as f64).powf(-(beta + 0.55)))
            .collect();
        Self::new(coeffs)
    }

    /// Built-in fixtures: `single` = (1), `fixture` = (1, 0.7, 0.4, 0.2),
    /// `poly` = polynomial decay with β = 2 over 256 harmonics.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "single" => Self::new(vec![1.0]),
            "fixture" => Self::new(vec![1.0, 0.7, 0.4, 0.2]),
            "poly" => Self::polynomial_decay(1.0, 2.0, 256),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Resolves a preset name, falling back to a JSON file `{"coeffs": [...]}`.
    pub fn load(spec: &str) -> Result<Self> {
        if PRESET_NAMES.contains(&spec) {
            return Self::preset(spec);
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(Error::UnknownPreset(spec.to_string()));
        }
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of stored coefficients `K`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `f_k` with 1-based `k`; zero outside the stored support.
    #[inline]
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// `‖f′‖² = Σ_k (2πk)² f_k²`.
    pub fn deriv_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (omega(i + 1) * c).powi(2))
            .sum()
    }

    /// `Σ_k (2πk)^{2β} f_k²`.
    pub fn sobolev_norm_sq(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::param("beta", "must be positive"));
        }
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| omega(i + 1).powf(2.0 * beta) * c * c)
            .sum())
    }

    /// `Σ_{lo ≤ k < hi} (2πk)² f_k²`.
    pub fn block_deriv_norm_sq(&self, lo: usize, hi: usize) -> Result<f64> {
        if lo == 0 {
            return Err(Error::param("lo", "indices are 1-based"));
        }
        if lo >= hi {
            return Err(Error::param("hi", format!("empty block [{lo}, {hi})")));
        }
        let end = hi.min(self.len() + 1);
        Ok((lo..end).map(|k| (omega(k) * self.coeff(k)).powi(2)).sum())
    }

    pub fn class_check(&self, rho: f64, beta_star: f64, l_star: f64) -> Result<ClassMembership> {
        if !(rho > 0.0) {
            return Err(Error::param("rho", "must be positive"));
        }
        if !(l_star > 0.0) {
            return Err(Error::param("l_star", "must be positive"));
        }
        if !(beta_star > 1.0) {
            return Err(Error::param("beta_star", "must exceed 1"));
        }
        let sobolev_norm_sq = self.sobolev_norm_sq(beta_star)?;
        Ok(ClassMembership {
            first_harmonic_ok: self.coeff(1).abs() >= rho,
            sobolev_ok: sobolev_norm_sq <= l_star * l_star,
            sobolev_norm_sq,
        })
    }

    /// Point value `Σ_k √2 f_k cos(2πkt)`.
    pub fn eval(&self, t: f64) -> f64 {
        // reduce to [-1/2, 1/2) so large |t| keeps full precision
        let t = t - t.round();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| SQRT_2 * c * (2.0 * PI * (i + 1) as f64 * t).cos())
            .sum()
    }
}
