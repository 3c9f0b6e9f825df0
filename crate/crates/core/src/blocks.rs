//! Weakly geometrically increasing blocks over the harmonics `1..=N_ε`.
//!
//! Block `j` (0-based here) covers `κ_j ≤ k < κ_{j+1}`. Each block carries its
//! length `T_j`, weight `σ_j² = Σ_{k∈B_j} (2πk)²` and Stein penalty
//! `φ_j = √(24 log ε⁻⁵ / T_j)`.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockScheme {
    eps: f64,
    beta_star: Option<f64>,
    n: usize,
    nu: Option<usize>,
    rho: Option<f64>,
    kappas: Vec<usize>,
    lengths: Vec<usize>,
    sigma_sq: Vec<f64>,
    penalties: Vec<f64>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// `log ε⁻⁵`.
pub fn log_eps_inv5(eps: f64) -> f64 {
    -5.0 * eps.ln()
}

/// Number of harmonics used: `max(5, ⌊(ε² log ε⁻⁵)^{−1/(2β*+1)}⌋)`.
pub fn n_eps(eps: f64, beta_star: f64) -> Result<usize> {
    check_eps(eps)?;
    if !(beta_star > 1.0) {
        return Err(Error::param("beta_star", format!("must exceed 1, got {beta_star}")));
    }
    let raw = (eps * eps * log_eps_inv5(eps)).powf(-1.0 / (2.0 * beta_star + 1.0));
    Ok((raw.floor() as usize).max(5))
}

/// `⌊e^{√(log N)}⌋`.
pub fn nu_eps(n: usize) -> usize {
    ((n as f64).ln().sqrt().exp().floor() as usize).max(1)
}

/// Largest integer strictly smaller than `x`, and at least 1.
///
/// Values within `1e-9` relative of an integer count as integral, so that
/// rounding in `(1+ρ)^j` cannot flip the strict inequality.
fn strict_floor(x: f64) -> usize {
    let nearest = x.round();
    let v = if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest - 1.0
    } else {
        x.floor()
    };
    if v < 1.0 {
        1
    } else {
        v as usize
    }
}

/// `Σ_{k=lo}^{hi-1} k²` in closed form.
fn sum_sq(lo: usize, hi: usize) -> f64 {
    let s = |n: usize| -> f64 {
        let n = n as f64;
        n * (n + 1.0) * (2.0 * n + 1.0) / 6.0
    };
    s(hi - 1) - s(lo - 1)
}

/// Boundary sequence `κ_1 = 1, κ_2 = 1 + ν, κ_j = κ_{j−1} + ⌊νρ(1+ρ)^{j−2}⌋`,
/// stopped at the first `κ ≥ N + 1`, which is then replaced by `N + 1`.
fn geometric_kappas(n: usize, nu: usize, rho: f64) -> Vec<usize> {
    let end = n + 1;
    let mut kappas = vec![1];
    let mut next = 1 + nu;
    let mut j = 3;
    while next < end {
        kappas.push(next);
        let step = strict_floor(nu as f64 * rho * (1.0 + rho).powi(j - 2));
        next += step;
        j += 1;
    }
    kappas.push(end);
    kappas
}

impl BlockScheme {
    /// The data-driven scheme for noise level `eps` and smoothness guess `beta_star`.
    pub fn build(eps: f64, beta_star: f64) -> Result<Self> {
        let n = n_eps(eps, beta_star)?;
        Self::with_nu(eps, beta_star, nu_eps(n))
    }

    /// Same construction with `ν` fixed by the caller.
    pub fn with_nu(eps: f64, beta_star: f64, nu: usize) -> Result<Self> {
        let n = n_eps(eps, beta_star)?;
        if nu < 1 {
            return Err(Error::param("nu", "must be at least 1"));
        }
        let rho = 1.0 / (nu as f64).cbrt();
        let kappas = geometric_kappas(n, nu, rho);
        let mut scheme = Self::from_boundaries(eps, kappas)?;
        scheme.beta_star = Some(beta_star);
        scheme.nu = Some(nu);
        scheme.rho = Some(rho);
        Ok(scheme)
    }

    /// Arbitrary partition of `1..κ_last` given by strictly increasing boundaries starting at 1.
    pub fn from_boundaries(eps: f64, kappas: Vec<usize>) -> Result<Self> {
        check_eps(eps)?;
        if kappas.len() < 2 || kappas[0] != 1 {
            return Err(Error::param("kappas", "need κ_1 = 1 and at least one block"));
        }
        if kappas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("kappas", "boundaries must be strictly increasing"));
        }
        let n = kappas[kappas.len() - 1] - 1;
        let lengths: Vec<usize> = kappas.windows(2).map(|w| w[1] - w[0]).collect();
        let sigma_sq = kappas
            .windows(2)
            .map(|w| 4.0 * PI * PI * sum_sq(w[0], w[1]))
            .collect();
        let log_term = log_eps_inv5(eps);
        let penalties = lengths
            .iter()
            .map(|&t| (24.0 * log_term / t as f64).sqrt())
            .collect();
        Ok(Self {
            eps,
            beta_star: None,
            n,
            nu: None,
            rho: None,
            kappas,
            lengths,
            sigma_sq,
            penalties,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn beta_star(&self) -> Option<f64> {
        self.beta_star
    }

    /// Total number of harmonics `N_ε`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> Option<usize> {
        self.nu
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    /// Boundaries `κ_1, ..., κ_{J+1}` (1-based harmonic indices).
    pub fn kappas(&self) -> &[usize] {
        &self.kappas
    }

    /// Number of blocks `J`.
    pub fn num_blocks(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn sigma_sq(&self) -> &[f64] {
        &self.sigma_sq
    }

    pub fn penalties(&self) -> &[f64] {
        &self.penalties
    }

    /// Harmonic indices of block `j` (0-based block index).
    pub fn block(&self, j: usize) -> Range<usize> {
        self.kappas[j]..self.kappas[j + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.kappas.windows(2).map(|w| w[0]..w[1])
    }

    pub(crate) fn check_block(&self, j: usize) -> Result<()> {
        if j >= self.num_blocks() {
            return Err(Error::param(
                "block",
                format!("index {j} out of range for {} blocks", self.num_blocks()),
            ));
        }
        Ok(())
    }

    /// `γ = max_j σ_{j+1}² / σ_j²`, or 1 for a single block.
    pub fn gamma(&self) -> f64 {
        self.sigma_sq
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(1.0, f64::max)
    }

    /// Writes `j,kappa,T,sigma_sq,phi` rows (1-based `j`).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,kappa,T,sigma_sq,phi")?;
        for j in 0..self.num_blocks() {
            writeln!(
                out,
                "{},{},{},{},{}",
                j + 1,
                self.kappas[j],
                self.lengths[j],
                self.sigma_sq[j],
                self.penalties[j]
            )?;
        }
        Ok(())
    }
}
