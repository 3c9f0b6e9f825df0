//! Filters `h ∈ [0,1]^N`, the risk functional that ranks them, and the
//! reference filters: blockwise oracle, penalized Stein, monotone oracle and Pinsker.
//!
//! The second-order risk of a filter is
//! `R^ε[f,h] = Σ_k (2πk)² [(1−h_k)² f_k² + ε² h_k²]`, with `h_k = 0` beyond `N`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::blocks::BlockScheme;
use crate::error::{Error, Result};
use crate::noise::Observation;
use crate::omega;
use crate::signal::FourierSignal;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Filter {
    h: Vec<f64>,
    /// Block boundaries the filter is constant on, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    kappas: Option<Vec<usize>>,
}

impl Filter {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if let Some(k) = h.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param(
                "h",
                format!("h_{} = {} lies outside [0, 1]", k + 1, h[k]),
            ));
        }
        Ok(Self { h, kappas: None })
    }

    pub fn zeros(n: usize) -> Self {
        Self { h: vec![0.0; n], kappas: None }
    }

    pub fn ones(n: usize) -> Self {
        Self { h: vec![1.0; n], kappas: None }
    }

    /// Expands one value per block of `scheme` into a filter over `1..=N`.
    pub fn blockwise(scheme: &BlockScheme, values: &[f64]) -> Result<Self> {
        if values.len() != scheme.num_blocks() {
            return Err(Error::Dimension(format!(
                "{} block values for {} blocks",
                values.len(),
                scheme.num_blocks()
            )));
        }
        let h = scheme
            .lengths()
            .iter()
            .zip(values)
            .flat_map(|(&t, &v)| std::iter::repeat_n(v, t))
            .collect();
        let mut filter = Self::new(h)?;
        filter.kappas = Some(scheme.kappas().to_vec());
        Ok(filter)
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    /// `h_k` with 1-based `k`; zero beyond `N`.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.h.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Length `N` of the support.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn kappas(&self) -> Option<&[usize]> {
        self.kappas.as_deref()
    }

    /// Value on each block, when the filter is blockwise constant.
    pub fn block_values(&self) -> Option<Vec<f64>> {
        let kappas = self.kappas.as_ref()?;
        Some(kappas[..kappas.len() - 1].iter().map(|&k| self.get(k)).collect())
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.h.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Contribution of harmonic `k` to `R^ε[f,h]`.
#[inline]
fn term(f: &FourierSignal, h: &Filter, eps: f64, k: usize) -> f64 {
    let hk = h.get(k);
    let fk = f.coeff(k);
    omega(k).powi(2) * ((1.0 - hk).powi(2) * fk * fk + eps * eps * hk * hk)
}

/// `R^ε[f,h]`, summed over every harmonic where `f` or `h` is nonzero.
pub fn risk(f: &FourierSignal, h: &Filter, eps: f64) -> f64 {
    let top = f.len().max(h.len());
    (1..=top).map(|k| term(f, h, eps, k)).sum()
}

/// `R_j^ε[f,a] = (1−a)² ‖f′‖²_{(j)} + ε² a² σ_j²` for block `j` (0-based).
pub fn block_risk(f: &FourierSignal, a: f64, scheme: &BlockScheme, j: usize, eps: f64) -> Result<f64> {
    scheme.check_block(j)?;
    let r = scheme.block(j);
    let energy = f.block_deriv_norm_sq(r.start, r.end)?;
    Ok((1.0 - a).powi(2) * energy + eps * eps * a * a * scheme.sigma_sq()[j])
}

/// Risk split along the blocks of a scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskBreakdown {
    pub per_block: Vec<f64>,
    /// Harmonics beyond `N_ε`.
    pub beyond: f64,
}

impl RiskBreakdown {
    pub fn total(&self) -> f64 {
        self.per_block.iter().sum::<f64>() + self.beyond
    }
}

pub fn risk_by_block(f: &FourierSignal, h: &Filter, scheme: &BlockScheme, eps: f64) -> RiskBreakdown {
    let per_block = scheme
        .blocks()
        .map(|r| r.map(|k| term(f, h, eps, k)).sum())
        .collect();
    let top = f.len().max(h.len());
    let beyond = (scheme.n() + 1..=top).map(|k| term(f, h, eps, k)).sum();
    RiskBreakdown { per_block, beyond }
}

/// Blockwise oracle `h*_j = ‖f′‖²_{(j)} / (‖f′‖²_{(j)} + ε² σ_j²)`.
pub fn oracle_blockwise(f: &FourierSignal, scheme: &BlockScheme, eps: f64) -> Filter {
    let values: Vec<f64> = scheme
        .blocks()
        .zip(scheme.sigma_sq())
        .map(|(r, &sigma_sq)| {
            let energy: f64 = r.map(|k| (omega(k) * f.coeff(k)).powi(2)).sum();
            energy / (energy + eps * eps * sigma_sq)
        })
        .collect();
    Filter::blockwise(scheme, &values).expect("oracle values lie in [0, 1]")
}

/// Penalized blockwise Stein filter
/// `ĥ_j = (1 − ε²σ_j²(1+φ_j) / ((‖y′‖²_{(j)} − 2ε²σ_j²)_+ + ε²σ_j²))_+`
/// with `‖y′‖²_{(j)} = Σ_{k∈B_j} (2πk)² (x_k² + x_k*²)`.
pub fn stein_filter(obs: &Observation, scheme: &BlockScheme) -> Result<Filter> {
    if obs.len() < scheme.n() {
        return Err(Error::Dimension(format!(
            "observation has {} coefficients but the scheme needs {}",
            obs.len(),
            scheme.n()
        )));
    }
    let eps = obs.eps();
    if (eps - scheme.eps()).abs() > 1e-12 * scheme.eps() {
        return Err(Error::param(
            "eps",
            format!("observation ε = {eps} but scheme ε = {}", scheme.eps()),
        ));
    }
    let mags: Vec<f64> = obs.magnitudes_sq().collect();
    let values: Vec<f64> = scheme
        .blocks()
        .enumerate()
        .map(|(j, r)| {
            let energy: f64 = r.map(|k| omega(k).powi(2) * mags[k - 1]).sum();
            let noise = eps * eps * scheme.sigma_sq()[j];
            let phi = scheme.penalties()[j];
            let denom = (energy - 2.0 * noise).max(0.0) + noise;
            (1.0 - noise * (1.0 + phi) / denom).max(0.0)
        })
        .collect();
    Filter::blockwise(scheme, &values)
}

/// Weighted least squares fit under `g_1 ≥ g_2 ≥ … ≥ g_n` (pool adjacent violators).
pub fn antitonic_regression(targets: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(targets.len(), weights.len());
    // stack of pooled blocks: (weighted mean, total weight, count)
    let mut pools: Vec<(f64, f64, usize)> = Vec::with_capacity(targets.len());
    for (&t, &w) in targets.iter().zip(weights) {
        let mut cur = (t, w, 1usize);
        while let Some(&(m, pw, c)) = pools.last() {
            if m >= cur.0 {
                break;
            }
            pools.pop();
            let total = pw + cur.1;
            let mean = if total > 0.0 {
                (m * pw + cur.0 * cur.1) / total
            } else {
                0.5 * (m + cur.0)
            };
            cur = (mean, total, c + cur.2);
        }
        pools.push(cur);
    }
    pools
        .into_iter()
        .flat_map(|(m, _, c)| std::iter::repeat_n(m, c))
        .collect()
}

/// Minimizer of `R^ε[f,h]` over nonincreasing `h ∈ [0,1]^N`.
///
/// Up to a constant the risk is `Σ_k w_k (h_k − t_k)²` with `w_k = (2πk)²(f_k² + ε²)`
/// and `t_k = f_k² / (f_k² + ε²)`, so the minimizer is the weighted antitonic fit of `t`.
pub fn monotone_oracle(f: &FourierSignal, eps: f64, n: usize) -> Result<Filter> {
    if n < 1 {
        return Err(Error::param("N", "must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    let (targets, weights): (Vec<f64>, Vec<f64>) = (1..=n)
        .map(|k| {
            let f2 = f.coeff(k).powi(2);
            (f2 / (f2 + eps * eps), omega(k).powi(2) * (f2 + eps * eps))
        })
        .unzip();
    let h = antitonic_regression(&targets, &weights)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    Filter::new(h)
}

fn check_smoothness(beta: f64, l: f64) -> Result<()> {
    if !(beta > 1.0) {
        return Err(Error::param("beta", format!("must exceed 1, got {beta}")));
    }
    if !(l > 0.0) {
        return Err(Error::param("L", "must be positive"));
    }
    Ok(())
}

/// Pinsker bandwidth `W_ε = (L/ε² · (β+2)(2β+1) / ((2π)^{2β}(β−1)))^{1/(2β+1)}`.
pub fn pinsker_width(beta: f64, l: f64, eps: f64) -> Result<f64> {
    check_smoothness(beta, l)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", "must lie in (0, 1)"));
    }
    let ratio = l / (eps * eps) * (beta + 2.0) * (2.0 * beta + 1.0)
        / ((2.0 * PI).powf(2.0 * beta) * (beta - 1.0));
    Ok(ratio.powf(1.0 / (2.0 * beta + 1.0)))
}

/// Pinsker filter `λ_k = (1 − (k/W_ε)^{β−1})_+` truncated at `n`. With `head`, harmonics
/// `k ≤ W_ε / log ε⁻²` are kept with weight 1.
pub fn pinsker_filter(beta: f64, l: f64, eps: f64, n: usize, head: bool) -> Result<Filter> {
    let width = pinsker_width(beta, l, eps)?;
    let head_end = if head { width / (-2.0 * eps.ln()) } else { 0.0 };
    let h = (1..=n)
        .map(|k| {
            let k = k as f64;
            if k <= head_end {
                1.0
            } else {
                (1.0 - (k / width).powf(beta - 1.0)).max(0.0)
            }
        })
        .collect();
    Filter::new(h)
}

/// `C(β,L) = ⅓ ((β−1)/(2π(β+2)))^{(2β−2)/(2β+1)} (L(2β+1))^{3/(2β+1)}`.
pub fn pinsker_constant(beta: f64, l: f64) -> Result<f64> {
    check_smoothness(beta, l)?;
    let base = (beta - 1.0) / (2.0 * PI * (beta + 2.0));
    let s = 2.0 * beta + 1.0;
    Ok(base.powf((2.0 * beta - 2.0) / s) * (l * s).powf(3.0 / s) / 3.0)
}

/// Supremum of `R^ε[f,h]` over the Sobolev ellipsoid `Σ_k (2πk)^{2β} f_k² ≤ L`.
///
/// The risk is linear in `(f_k²)`, so the sup puts all mass on the harmonic that
/// maximizes `(2πk)^{2−2β}(1−h_k)²`; for `k > N` that factor decreases, so `k = N+1` suffices.
pub fn worst_case_sobolev_risk(h: &Filter, beta: f64, l: f64, eps: f64) -> Result<f64> {
    check_smoothness(beta, l)?;
    let variance: f64 = h
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (omega(i + 1) * v).powi(2))
        .sum::<f64>()
        * eps
        * eps;
    let bias = (1..=h.len() + 1)
        .map(|k| omega(k).powf(2.0 - 2.0 * beta) * (1.0 - h.get(k)).powi(2))
        .fold(0.0, f64::max);
    Ok(variance + l * bias)
}
