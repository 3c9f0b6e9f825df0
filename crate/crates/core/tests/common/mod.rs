//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use shift_pmle::signal::FourierSignal;

pub fn fixture() -> FourierSignal {
    FourierSignal::new(vec![1.0, 0.7, 0.4, 0.2]).unwrap()
}

/// Risk of a filter given as a plain slice, summed term by term.
pub fn direct_risk(f: &FourierSignal, h: &[f64], eps: f64) -> f64 {
    let top = f.len().max(h.len());
    (1..=top)
        .map(|k| {
            let hk = h.get(k - 1).copied().unwrap_or(0.0);
            let fk = f.coeff(k);
            (2.0 * PI * k as f64).powi(2) * ((1.0 - hk).powi(2) * fk * fk + eps * eps * hk * hk)
        })
        .sum()
}

/// Minimum risk over nonincreasing filters on `1..=n` by exhaustive enumeration of
/// contiguous level sets: the optimum is piecewise constant with each piece equal to
/// the weighted mean of its targets, so scanning all `2^{n−1}` segmentations and
/// keeping the feasible ones finds it.
pub fn monotone_min_by_segmentation(f: &FourierSignal, eps: f64, n: usize) -> (f64, Vec<f64>) {
    let (t, w): (Vec<f64>, Vec<f64>) = (1..=n)
        .map(|k| {
            let f2 = f.coeff(k).powi(2);
            (f2 / (f2 + eps * eps), (2.0 * PI * k as f64).powi(2) * (f2 + eps * eps))
        })
        .unzip();
    let mut best = (f64::INFINITY, vec![]);
    for mask in 0u32..(1 << (n - 1)) {
        let mut h = vec![0.0; n];
        let mut start = 0;
        for end in 1..=n {
            let cut = end == n || mask & (1 << (end - 1)) != 0;
            if cut {
                let wsum: f64 = w[start..end].iter().sum();
                let m = (start..end).map(|i| w[i] * t[i]).sum::<f64>() / wsum;
                for v in &mut h[start..end] {
                    *v = m.clamp(0.0, 1.0);
                }
                start = end;
            }
        }
        if h.windows(2).all(|p| p[1] <= p[0]) {
            let r = direct_risk(f, &h, eps);
            if r < best.0 {
                best = (r, h);
            }
        }
    }
    best
}

/// Minimum risk over nonincreasing filters on a uniform grid of `[0,1]` with `steps` cells.
pub fn monotone_min_by_grid(f: &FourierSignal, eps: f64, n: usize, steps: usize) -> f64 {
    fn rec(f: &FourierSignal, eps: f64, h: &mut Vec<f64>, n: usize, steps: usize, cap: usize, best: &mut f64) {
        if h.len() == n {
            *best = best.min(direct_risk(f, h, eps));
            return;
        }
        for s in 0..=cap {
            h.push(s as f64 / steps as f64);
            rec(f, eps, h, n, steps, s, best);
            h.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(f, eps, &mut Vec::new(), n, steps, steps, &mut best);
    best
}

/// Minimizer of a convex function on `[lo, hi]`: dense grid, then a parabola through
/// the best grid point and its neighbours (exact for quadratics).
pub fn minimize_convex(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let cells = 10_000;
    let step = (hi - lo) / cells as f64;
    let at = |i: usize| lo + step * i as f64;
    let best = (0..=cells)
        .min_by(|&a, &b| g(at(a)).partial_cmp(&g(at(b))).unwrap())
        .unwrap();
    if best == 0 || best == cells {
        // check whether the minimum sits on the edge or just inside it
        let inner = if best == 0 { 1 } else { cells - 1 };
        let (x0, x1, x2) = if best == 0 { (0, 1, 2) } else { (cells - 2, cells - 1, cells) };
        let (g0, g1, g2) = (g(at(x0)), g(at(x1)), g(at(x2)));
        let curv = g2 - 2.0 * g1 + g0;
        if curv <= 0.0 {
            return at(best);
        }
        let v = at(inner) - 0.5 * step * (g2 - g0) / curv;
        return v.clamp(lo, hi);
    }
    let (g0, g1, g2) = (g(at(best - 1)), g(at(best)), g(at(best + 1)));
    let curv = g2 - 2.0 * g1 + g0;
    if curv <= 0.0 {
        return at(best);
    }
    at(best) - 0.5 * step * (g2 - g0) / curv
}

/// Five-point central difference of `g` at `x`.
pub fn fd5(g: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
}
