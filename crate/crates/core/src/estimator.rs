//! Two-step shift estimator.
//!
//! A preliminary arctan estimate from the first harmonic localizes the shift;
//! the estimate is then refined by maximizing the filtered profile likelihood
//! `Φ(τ,h) = ½ Σ_k h_k (x_k cos 2πkτ + x_k* sin 2πkτ)²` over a small window
//! around it, using the penalized Stein filter.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::blocks::BlockScheme;
use crate::error::{Error, Result};
use crate::filters::{stein_filter, Filter};
use crate::noise::Observation;
use crate::omega;

/// Coarse grid cells used to bracket the maximum.
const COARSE_CELLS: usize = 64;
const MAX_GOLDEN_ITERS: usize = 200;
const MAX_NEWTON_ITERS: usize = 60;
/// Sample points for the concavity diagnostic.
pub const CONCAVITY_POINTS: usize = 65;

/// `θ̄ = arctan(x_1*/x_1) / 2π`, or `1/4` when `x_1 = 0`.
pub fn preliminary(obs: &Observation) -> f64 {
    let (a, b) = (obs.x()[0], obs.xs()[0]);
    if a == 0.0 {
        0.25
    } else {
        (b / a).atan() / (2.0 * PI)
    }
}

/// `(Φ′, Φ″, Φ‴)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

/// Profile likelihood of an observation under a fixed filter.
#[derive(Debug, Clone, Copy)]
pub struct ProfileLikelihood<'a> {
    obs: &'a Observation,
    h: &'a Filter,
}

impl<'a> ProfileLikelihood<'a> {
    pub fn new(obs: &'a Observation, h: &'a Filter) -> Result<Self> {
        let support = h.values().iter().rposition(|v| *v != 0.0).map_or(0, |i| i + 1);
        if obs.len() < support {
            return Err(Error::Dimension(format!(
                "filter uses {support} harmonics but the observation stores {}",
                obs.len()
            )));
        }
        Ok(Self { obs, h })
    }

    /// Active harmonics as `(k, h_k, x_k, x_k*)`.
    fn terms(&self) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
        self.h
            .values()
            .iter()
            .zip(self.obs.x().iter().zip(self.obs.xs()))
            .enumerate()
            .filter(|(_, (h, _))| **h != 0.0)
            .map(|(i, (&h, (&a, &b)))| (i + 1, h, a, b))
    }

    /// Coefficients in the frame centred at `tau`.
    #[inline]
    fn rotated(k: usize, a: f64, b: f64, tau: f64) -> (f64, f64) {
        // reduce the phase before multiplying by k to keep sin/cos arguments small
        let t = tau - tau.round();
        let (s, c) = (2.0 * PI * k as f64 * t).sin_cos();
        (a * c + b * s, -a * s + b * c)
    }

    pub fn value(&self, tau: f64) -> f64 {
        0.5 * self
            .terms()
            .map(|(k, h, a, b)| h * Self::rotated(k, a, b, tau).0.powi(2))
            .sum::<f64>()
    }

    pub fn derivatives(&self, tau: f64) -> Derivatives {
        let mut d = Derivatives { first: 0.0, second: 0.0, third: 0.0 };
        for (k, h, a, b) in self.terms() {
            let (u, v) = Self::rotated(k, a, b, tau);
            let w = omega(k);
            d.first += h * w * u * v;
            d.second += h * w * w * (v * v - u * u);
            d.third -= 4.0 * h * w * w * w * u * v;
        }
        d
    }

    pub fn first_derivative(&self, tau: f64) -> f64 {
        self.terms()
            .map(|(k, h, a, b)| {
                let (u, v) = Self::rotated(k, a, b, tau);
                h * omega(k) * u * v
            })
            .sum()
    }

    pub fn second_derivative(&self, tau: f64) -> f64 {
        self.terms()
            .map(|(k, h, a, b)| {
                let (u, v) = Self::rotated(k, a, b, tau);
                h * omega(k).powi(2) * (v * v - u * u)
            })
            .sum()
    }
}

pub fn profile_likelihood(obs: &Observation, h: &Filter, tau: f64) -> Result<f64> {
    Ok(ProfileLikelihood::new(obs, h)?.value(tau))
}

pub fn profile_derivatives(obs: &Observation, h: &Filter, tau: f64) -> Result<Derivatives> {
    Ok(ProfileLikelihood::new(obs, h)?.derivatives(tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Maximum {
    pub tau: f64,
    pub value: f64,
    pub curvature: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `Φ″ < 0` at every one of [`CONCAVITY_POINTS`] evenly spaced points of the interval.
    pub concave_on_grid: bool,
}

/// Maximizes `Φ(·,h)` over `[center − radius, center + radius]`.
///
/// A 65-point grid brackets the best cell (ties go to the point nearest the
/// center), golden-section search shrinks the bracket, and a safeguarded Newton
/// step on `Φ′` polishes the root when the bracket holds a sign change.
pub fn local_maximize(
    obs: &Observation,
    h: &Filter,
    center: f64,
    radius: f64,
    tol: f64,
) -> Result<Maximum> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let phi = ProfileLikelihood::new(obs, h)?;
    let lo = center - radius;
    let hi = center + radius;
    let grid_point = |i: usize| center + radius * (2.0 * i as f64 / COARSE_CELLS as f64 - 1.0);

    let concave_on_grid = (0..CONCAVITY_POINTS).all(|i| {
        let tau = center + radius * (2.0 * i as f64 / (CONCAVITY_POINTS - 1) as f64 - 1.0);
        phi.second_derivative(tau) < 0.0
    });

    let values: Vec<f64> = (0..=COARSE_CELLS).map(|i| phi.value(grid_point(i))).collect();
    let mid = COARSE_CELLS / 2;
    // visit grid points by distance from the center so ties resolve toward it
    let mut best = mid;
    for off in 1..=mid {
        for i in [mid - off, mid + off] {
            if values[i] > values[best] {
                best = i;
            }
        }
    }
    let flat = values.iter().all(|v| *v == values[mid]);
    if flat {
        return Ok(Maximum {
            tau: center,
            value: values[mid],
            curvature: phi.second_derivative(center),
            converged: true,
            iterations: 0,
            concave_on_grid,
        });
    }

    let mut a = grid_point(best.saturating_sub(1));
    let mut b = grid_point((best + 1).min(COARSE_CELLS));
    let mut iterations = 0;

    // golden section on [a, b]
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (phi.value(c), phi.value(d));
    let golden_target = tol.max(1e-7 * radius);
    while b - a > golden_target && iterations < MAX_GOLDEN_ITERS {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi.value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi.value(d);
        }
    }
    let mut converged = b - a <= golden_target;
    let mut tau = if fc >= fd { c } else { d };

    // widen the bracket slightly and polish via Φ′ = 0 when a sign change is present
    let pad = 4.0 * golden_target;
    let (mut left, mut right) = ((a - pad).max(lo), (b + pad).min(hi));
    let (gl, gr) = (phi.first_derivative(left), phi.first_derivative(right));
    if gl > 0.0 && gr < 0.0 {
        let mut newton_converged = false;
        let mut x = tau.clamp(left, right);
        for _ in 0..MAX_NEWTON_ITERS {
            iterations += 1;
            let g = phi.first_derivative(x);
            if g == 0.0 {
                newton_converged = true;
                break;
            }
            if g > 0.0 {
                left = x;
            } else {
                right = x;
            }
            let curv = phi.second_derivative(x);
            let mut next = if curv < 0.0 { x - g / curv } else { f64::NAN };
            if !(next > left && next < right) {
                next = 0.5 * (left + right);
            }
            let step = (next - x).abs();
            x = next;
            if step <= tol || right - left <= tol {
                newton_converged = true;
                break;
            }
        }
        if newton_converged {
            // near the optimum Φ is flat to rounding, so compare with a few ulps of slack
            let (fx, ft) = (phi.value(x), phi.value(tau));
            if fx >= ft - 64.0 * f64::EPSILON * ft.abs() {
                tau = x;
            }
            converged = true;
        }
    }

    // a boundary maximum is reported at the boundary itself
    for edge in [lo, hi] {
        if phi.value(edge) > phi.value(tau) {
            tau = edge;
        }
    }

    Ok(Maximum {
        tau,
        value: phi.value(tau),
        curvature: phi.second_derivative(tau),
        converged,
        iterations,
        concave_on_grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateOptions {
    pub tol: f64,
    /// Clamp the final estimate to `[−T, T]`.
    pub clamp: Option<f64>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { tol: 1e-12, clamp: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub theta_prelim: f64,
    pub theta_hat: f64,
    /// `δ_ε = ε log ε⁻²`.
    pub delta: f64,
    /// `min(δ_ε, 1/(4πN_ε))`, the half-width actually searched.
    pub delta_effective: f64,
    pub filter: Filter,
    pub curvature_at_opt: f64,
    pub converged: bool,
    pub iterations: usize,
    pub concave_on_grid: bool,
}

/// `δ_ε = ε log ε⁻²`.
pub fn search_half_width(eps: f64) -> f64 {
    -2.0 * eps * eps.ln()
}

/// Search half-width used around the preliminary estimate for a filter on `n` harmonics.
pub fn effective_half_width(eps: f64, n: usize) -> f64 {
    search_half_width(eps).min(1.0 / (4.0 * PI * n as f64))
}

/// Full adaptive procedure with default options.
pub fn estimate(obs: &Observation, beta_star: f64) -> Result<EstimateReport> {
    estimate_with(obs, beta_star, &EstimateOptions::default())
}

pub fn estimate_with(obs: &Observation, beta_star: f64, opts: &EstimateOptions) -> Result<EstimateReport> {
    let scheme = BlockScheme::build(obs.eps(), beta_star)?;
    let filter = stein_filter(obs, &scheme)?;
    estimate_with_filter(obs, filter, scheme.n(), opts)
}

/// Local maximization around the preliminary estimate with a caller-supplied filter
/// (used for the oracle and Pinsker benchmarks).
pub fn estimate_with_filter(
    obs: &Observation,
    filter: Filter,
    n: usize,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    let theta_prelim = preliminary(obs);
    let delta = search_half_width(obs.eps());
    let delta_effective = effective_half_width(obs.eps(), n.max(1));
    let max = local_maximize(obs, &filter, theta_prelim, delta_effective, opts.tol)?;
    let theta_hat = match opts.clamp {
        Some(t) => max.tau.clamp(-t, t),
        None => max.tau,
    };
    Ok(EstimateReport {
        theta_prelim,
        theta_hat,
        delta,
        delta_effective,
        filter,
        curvature_at_opt: max.curvature,
        converged: max.converged,
        iterations: max.iterations,
        concave_on_grid: max.concave_on_grid,
    })
}

/// Writes `tau,phi,d1,d2` at `points` evenly spaced points of `[center − radius, center + radius]`.
pub fn write_trace<W: Write>(
    obs: &Observation,
    h: &Filter,
    center: f64,
    radius: f64,
    points: usize,
    mut out: W,
) -> Result<()> {
    let phi = ProfileLikelihood::new(obs, h)?;
    writeln!(out, "tau,phi,d1,d2")?;
    let points = points.max(2);
    for i in 0..points {
        let tau = center + radius * (2.0 * i as f64 / (points - 1) as f64 - 1.0);
        let d = phi.derivatives(tau);
        writeln!(out, "{},{},{},{}", tau, phi.value(tau), d.first, d.second)?;
    }
    Ok(())
}
