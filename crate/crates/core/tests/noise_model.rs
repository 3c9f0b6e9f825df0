use proptest::prelude::*;
use shift_pmle::noise::{drift_only, drift_only_path, sequence_from_draws, simulate_path, simulate_sequence};
use shift_pmle::rng::{std_normal, substream};
use shift_pmle::signal::FourierSignal;
use shift_pmle::Observation;

fn obs_strategy() -> impl Strategy<Value = Observation> {
    (1usize..30).prop_flat_map(|k| {
        (
            prop::collection::vec(-3.0f64..3.0, k),
            prop::collection::vec(-3.0f64..3.0, k),
        )
            .prop_map(|(x, xs)| Observation::new(0.1, x, xs).unwrap())
    })
}

proptest! {
    #[test]
    fn rotation_preserves_magnitudes(obs in obs_strategy(), tau in -2.0f64..2.0) {
        let rot = obs.rotate_frame(tau);
        for (a, b) in obs.magnitudes_sq().zip(rot.magnitudes_sq()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-12));
        }
    }

    #[test]
    fn rotation_group_property(obs in obs_strategy(), t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
        let two = obs.rotate_frame(t1).rotate_frame(t2);
        let once = obs.rotate_frame(t1 + t2);
        for (a, b) in two.x().iter().zip(once.x()).chain(two.xs().iter().zip(once.xs())) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn shift_covariance_of_drift_with_shared_draws() {
    let f = FourierSignal::new(vec![1.0, 0.7, 0.4, 0.2]).unwrap();
    let (theta, delta) = (0.05, 0.013);
    let a = drift_only(&f, theta + delta, 0.1, 6).unwrap();
    let b = drift_only(&f, theta, 0.1, 6).unwrap().rotate_frame(-delta);
    for (u, v) in a.x().iter().zip(b.x()).chain(a.xs().iter().zip(b.xs())) {
        assert!((u - v).abs() < 1e-14);
    }
}

#[test]
fn rotated_noise_stays_standard_gaussian() {
    let f = FourierSignal::new(vec![1.0, 0.7]).unwrap();
    let (theta, delta, eps) = (0.05, 0.2, 0.3);
    let mut rng = substream(42, 0);
    let n = 10_000;
    let clean = drift_only(&f, theta, eps, 2).unwrap().rotate_frame(-delta);
    let mut sums = [0.0f64; 4];
    let mut sq = [0.0f64; 4];
    for _ in 0..n {
        let draws: Vec<f64> = (0..4).map(|_| std_normal(&mut rng)).collect();
        let rot = sequence_from_draws(&f, theta, eps, &draws).unwrap().rotate_frame(-delta);
        let noise = [
            (rot.x()[0] - clean.x()[0]) / eps,
            (rot.xs()[0] - clean.xs()[0]) / eps,
            (rot.x()[1] - clean.x()[1]) / eps,
            (rot.xs()[1] - clean.xs()[1]) / eps,
        ];
        for i in 0..4 {
            sums[i] += noise[i];
            sq[i] += noise[i] * noise[i];
        }
    }
    for i in 0..4 {
        let mean = sums[i] / n as f64;
        let var = sq[i] / n as f64 - mean * mean;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
        // sd of the sample variance is √(2/n) ≈ 0.014
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}

#[test]
fn path_quadrature_matches_sequence_drift() {
    let f = FourierSignal::new(vec![1.0, 0.5]).unwrap();
    let theta = 0.1;
    let exact = drift_only(&f, theta, 0.1, 8).unwrap();
    for m in [1024, 4096] {
        let obs = drift_only_path(&f, theta, m).unwrap().extract_coefficients(8).unwrap();
        for (a, b) in obs.x().iter().zip(exact.x()).chain(obs.xs().iter().zip(exact.xs())) {
            assert!((a - b).abs() <= 5e-3, "M={m}: {a} vs {b}");
        }
    }
}

#[test]
fn path_coefficient_variance_is_eps_sq() {
    let f = FourierSignal::new(vec![1.0]).unwrap();
    let eps = 0.2;
    let mut rng = substream(8, 1);
    let n = 1000;
    let vals: Vec<f64> = (0..n)
        .map(|_| simulate_path(&f, 0.0, eps, 256, &mut rng).unwrap().extract_coefficients(1).unwrap().x()[0])
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var / (eps * eps) - 1.0).abs() < 0.1, "var {var}");
}

/// Per-coefficient means and variances over replications.
fn moments(samples: &[Observation], k: usize) -> (f64, f64, f64, f64) {
    let n = samples.len() as f64;
    let stat = |vals: Vec<f64>| {
        let m = vals.iter().sum::<f64>() / n;
        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    };
    let (mx, vx) = stat(samples.iter().map(|o| o.x()[k]).collect());
    let (ms, vs) = stat(samples.iter().map(|o| o.xs()[k]).collect());
    (mx, vx, ms, vs)
}

#[test]
fn sequence_and_path_moments_agree() {
    let f = FourierSignal::new(vec![1.0, 0.7, 0.4, 0.2]).unwrap();
    let (theta, eps, m, len, n) = (0.05, 0.3, 4096, 6, 600);
    let mut rng = substream(99, 0);
    let paths: Vec<Observation> = (0..n)
        .map(|_| simulate_path(&f, theta, eps, m, &mut rng).unwrap().extract_coefficients(len).unwrap())
        .collect();
    let mut rng = substream(99, 1);
    let seqs: Vec<Observation> = (0..n)
        .map(|_| simulate_sequence(&f, theta, eps, len, &mut rng).unwrap())
        .collect();
    let nf = n as f64;
    for k in 0..len {
        let (pm, pv, psm, psv) = moments(&paths, k);
        let (sm, sv, ssm, ssv) = moments(&seqs, k);
        let mean_se = (pv / nf + sv / nf).sqrt();
        assert!((pm - sm).abs() <= 3.0 * mean_se + 1.0 / m as f64, "k={k}");
        assert!((psm - ssm).abs() <= 3.0 * mean_se + 1.0 / m as f64, "k={k}");
        // sd of a Gaussian sample variance is σ²√(2/(n−1))
        let var_se = eps * eps * (2.0 / (nf - 1.0)).sqrt() * 2f64.sqrt();
        assert!((pv - sv).abs() <= 3.0 * var_se, "k={k}: {pv} vs {sv}");
        assert!((psv - ssv).abs() <= 3.0 * var_se, "k={k}: {psv} vs {ssv}");
    }
}
