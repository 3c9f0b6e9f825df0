//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::f64::consts::PI;

use common::{fd5, fixture, monotone_min_by_segmentation};
use rand::Rng;
use shift_pmle::blocks::BlockScheme;
use shift_pmle::estimator::{estimate, preliminary, ProfileLikelihood};
use shift_pmle::experiments::{
    pinsker_check, oracle_gap_check, run_monte_carlo, EstimatorKind, ExperimentConfig, SignalSpec,
};
use shift_pmle::filters::{monotone_oracle, oracle_blockwise, risk, stein_filter, Filter};
use shift_pmle::noise::{simulate_path, simulate_sequence};
use shift_pmle::rng::substream;
use shift_pmle::signal::{FourierSignal, PRESET_NAMES};
use shift_pmle::Observation;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn risk_config(replications: u32, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        signal: SignalSpec::Named("fixture".into()),
        theta: 0.05,
        eps_list: vec![0.01],
        replications,
        seed,
        beta_star: 2.0,
        estimators: vec![EstimatorKind::Stein, EstimatorKind::OracleFilter],
        pinsker: None,
        output: None,
        noiseless: false,
    }
}

/// 1 and 2: first-order efficiency and oracle dominance on the same runs.
fn efficiency_and_dominance() -> (Outcome, Outcome) {
    let cfg = risk_config(2000, 20_261_016);
    let report = run_monte_carlo(&cfg, None).unwrap();
    let stein = report.row(0.01, EstimatorKind::Stein).unwrap();
    let oracle = report.row(0.01, EstimatorKind::OracleFilter).unwrap();

    let f = fixture();
    let eps = 0.01;
    let scheme = BlockScheme::build(eps, 2.0).unwrap();
    let second_order = risk(&f, &oracle_blockwise(&f, &scheme, eps), eps) / f.deriv_norm_sq();
    let upper = 1.0 + 2.0 * second_order;
    let slack = 3.0 * stein.std_error;
    let fail_rate = stein.n_failures as f64 / stein.replications as f64;
    let first = outcome(
        stein.normalized_risk >= 0.85 - slack && stein.normalized_risk <= upper + slack && fail_rate < 0.005,
        format!(
            "normalized risk {:.4} ± {:.4} (SE), target [0.85, {:.5}], failures {}",
            stein.normalized_risk, stein.std_error, upper, stein.n_failures
        ),
    );

    let combined = (stein.std_error.powi(2) + oracle.std_error.powi(2)).sqrt();
    let second = outcome(
        oracle.normalized_risk <= stein.normalized_risk + 3.0 * combined,
        format!(
            "oracle {:.4} vs stein {:.4} (+3·SE {:.4})",
            oracle.normalized_risk,
            stein.normalized_risk,
            3.0 * combined
        ),
    );
    (first, second)
}

/// 3: blockwise oracle within γ of the monotone oracle, exactly.
fn blockwise_vs_monotone() -> Outcome {
    let eps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let betas = [1.25, 1.5, 2.0];
    let mut checked = 0;
    let mut failures = Vec::new();
    for name in PRESET_NAMES {
        let f = FourierSignal::preset(name).unwrap();
        for row in oracle_gap_check(&f, &eps, &betas).unwrap() {
            checked += 1;
            if !(row.oracle_risk <= row.bound + 1e-10) {
                failures.push(format!("{name} eps={} beta*={}", row.eps, row.beta_star));
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} grid points, failures: {failures:?}"))
}

/// 4: PAVA against exhaustive search over monotone filters.
fn monotone_oracle_correct() -> Outcome {
    let mut rng = substream(4, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let eps = 10f64.powf(rng.random_range(-2.0..-0.5));
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * 4.0 * eps).collect();
        let f = FourierSignal::new(coeffs).unwrap();
        let h = monotone_oracle(&f, eps, n).unwrap();
        let (brute, _) = monotone_min_by_segmentation(&f, eps, n);
        worst = worst.max((risk(&f, &h, eps) - brute).abs());
    }
    outcome(worst <= 1e-4, format!("max risk gap {worst:.3e} over 100 signals"))
}

/// 5: worst-case Pinsker risk against C(β,L) ε^{(4β−4)/(2β+1)}.
fn pinsker_ratio() -> Outcome {
    let rows = pinsker_check(2.0, 1.0, &[1e-4, 1e-5, 1e-6, 1e-7]).unwrap();
    let at = |e: f64| rows.iter().find(|r| r.eps == e).unwrap().ratio;
    let r6 = at(1e-6);
    let closer = (at(1e-7) - 1.0).abs() < (at(1e-4) - 1.0).abs();
    outcome(
        (0.7..=1.3).contains(&r6) && closer,
        format!(
            "ratio 1e-4: {:.9}, 1e-6: {:.9}, 1e-7: {:.9}",
            at(1e-4),
            r6,
            at(1e-7)
        ),
    )
}

/// 6: tail of the preliminary estimator.
fn preliminary_tail() -> Outcome {
    let f = FourierSignal::new(vec![1.0]).unwrap();
    let (eps, theta, t) = (0.01, 0.2, 0.2);
    let x = 5.0 * eps;
    let n = 100_000;
    let mut rng = substream(6, 0);
    let hits = (0..n)
        .filter(|_| {
            let obs = simulate_sequence(&f, theta, eps, 1, &mut rng).unwrap();
            (preliminary(&obs) - theta).abs() >= x
        })
        .count();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let bound = (-2.0 * (x / eps).powi(2) * (2.0 * PI * t).cos().powi(2)).exp();
    outcome(
        p <= bound + 3.0 * se,
        format!("exceedance {p:.5} (SE {se:.5}) vs bound {bound:.5}"),
    )
}

/// 7: Stein filter sits between the widened lower bound and the oracle.
fn sandwich() -> Outcome {
    let f = fixture();
    let eps = 0.01;
    let scheme = BlockScheme::build(eps, 2.0).unwrap();
    let oracle = oracle_blockwise(&f, &scheme, eps);
    let reps = 10_000;
    let mut inside = vec![0usize; scheme.num_blocks()];
    let mut rng = substream(7, 0);
    for _ in 0..reps {
        let obs = simulate_sequence(&f, 0.05, eps, scheme.n(), &mut rng).unwrap();
        let h = stein_filter(&obs, &scheme).unwrap();
        for (j, r) in scheme.blocks().enumerate() {
            let star = oracle.get(r.start);
            let lower = star - 2.0 * 2f64.sqrt() * scheme.penalties()[j] * (1.0 - star);
            let v = h.get(r.start);
            if v >= lower && v <= star {
                inside[j] += 1;
            }
        }
    }
    let freqs: Vec<f64> = inside.iter().map(|c| *c as f64 / reps as f64).collect();
    outcome(freqs.iter().all(|p| *p >= 0.99), format!("per-block containment {freqs:?}"))
}

/// 8: analytic derivatives against five-point differences.
fn derivatives() -> Outcome {
    let mut rng = substream(8, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(1..=20);
        let x = (0..k).map(|_| rng.random_range(-1.5..1.5)).collect();
        let xs = (0..k).map(|_| rng.random_range(-1.5..1.5)).collect();
        let obs = Observation::new(0.1, x, xs).unwrap();
        let h = Filter::new((0..k).map(|_| rng.random::<f64>()).collect()).unwrap();
        let phi = ProfileLikelihood::new(&obs, &h).unwrap();
        let tau = rng.random_range(-0.5..0.5);
        let d = phi.derivatives(tau);
        let step = 1e-5;
        let pairs = [
            (d.first, fd5(&|t| phi.value(t), tau, step)),
            (d.second, fd5(&|t| phi.derivatives(t).first, tau, step)),
            (d.third, fd5(&|t| phi.derivatives(t).second, tau, step)),
        ];
        for (exact, approx) in pairs {
            worst = worst.max((exact - approx).abs() / (1.0 + exact.abs()));
        }
    }
    outcome(worst <= 1e-6, format!("max relative gap {worst:.3e}"))
}

/// 9: rotation invariance, shift equivariance, periodicity, sequence/path consistency.
fn invariance_suite() -> Outcome {
    let f = fixture();
    let eps = 0.01;
    let scheme = BlockScheme::build(eps, 2.0).unwrap();
    let mut rng = substream(9, 0);
    let mut rot_gap: f64 = 0.0;
    let mut shift_gap: f64 = 0.0;
    let mut period_gap: f64 = 0.0;
    for _ in 0..200 {
        let obs = simulate_sequence(&f, 0.05, eps, scheme.n(), &mut rng).unwrap();
        let tau = rng.random_range(-1.0..1.0);
        let a = stein_filter(&obs, &scheme).unwrap();
        let b = stein_filter(&obs.rotate_frame(tau), &scheme).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            rot_gap = rot_gap.max((u - v).abs());
        }
        let delta = rng.random_range(-0.1..0.1);
        let e0 = estimate(&obs, 2.0).unwrap();
        let e1 = estimate(&obs.rotate_frame(delta), 2.0).unwrap();
        shift_gap = shift_gap.max((e1.theta_hat - (e0.theta_hat - delta)).abs());
        let phi = ProfileLikelihood::new(&obs, &a).unwrap();
        period_gap = period_gap.max((phi.value(tau) - phi.value(tau + 1.0)).abs());
    }

    // sequence vs path moments at M = 4096
    let (theta, sigma, m, len, n) = (0.05, 0.3, 4096, 5, 500);
    let mut rp = substream(9, 1);
    let mut rs = substream(9, 2);
    let paths: Vec<Observation> = (0..n)
        .map(|_| simulate_path(&f, theta, sigma, m, &mut rp).unwrap().extract_coefficients(len).unwrap())
        .collect();
    let seqs: Vec<Observation> = (0..n)
        .map(|_| simulate_sequence(&f, theta, sigma, len, &mut rs).unwrap())
        .collect();
    let nf = n as f64;
    let mut moments_ok = true;
    for k in 0..len {
        for pick in [|o: &Observation, k: usize| o.x()[k], |o: &Observation, k: usize| o.xs()[k]] {
            let stat = |s: &[Observation]| {
                let v: Vec<f64> = s.iter().map(|o| pick(o, k)).collect();
                let mean = v.iter().sum::<f64>() / nf;
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
                (mean, var)
            };
            let ((pm, pv), (sm, sv)) = (stat(&paths), stat(&seqs));
            let mean_se = ((pv + sv) / nf).sqrt();
            let var_se = sigma * sigma * (4.0 / (nf - 1.0)).sqrt();
            moments_ok &= (pm - sm).abs() <= 3.0 * mean_se + 1.0 / m as f64;
            moments_ok &= (pv - sv).abs() <= 3.0 * var_se;
        }
    }
    outcome(
        rot_gap <= 1e-10 && shift_gap <= 1e-9 && period_gap <= 1e-10 && moments_ok,
        format!(
            "rotation {rot_gap:.1e}, shift {shift_gap:.1e}, period {period_gap:.1e}, path moments {}",
            if moments_ok { "ok" } else { "off" }
        ),
    )
}

/// 10: reports do not depend on the worker count.
fn determinism() -> Outcome {
    let mut cfg = risk_config(300, 99);
    cfg.eps_list = vec![0.02, 0.01];
    cfg.estimators.push(EstimatorKind::PreliminaryOnly);
    let one = run_monte_carlo(&cfg, Some(1)).unwrap();
    let eight = run_monte_carlo(&cfg, Some(8)).unwrap();
    let csv_same = one.to_csv_string() == eight.to_csv_string();
    let json_same = serde_json::to_string(&one).unwrap() == serde_json::to_string(&eight).unwrap();
    outcome(csv_same && json_same, format!("csv identical: {csv_same}, json identical: {json_same}"))
}

#[test]
fn acceptance_criteria() {
    let (first, second) = efficiency_and_dominance();
    let results = vec![
        ("1 first-order efficiency", first),
        ("2 oracle dominance", second),
        ("3 blockwise vs monotone oracle", blockwise_vs_monotone()),
        ("4 monotone oracle", monotone_oracle_correct()),
        ("5 pinsker constant", pinsker_ratio()),
        ("6 preliminary tail", preliminary_tail()),
        ("7 filter sandwich", sandwich()),
        ("8 derivatives", derivatives()),
        ("9 invariance suite", invariance_suite()),
        ("10 determinism", determinism()),
    ];
    for (name, r) in &results {
        println!("[{}] {name}: {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|(_, r)| !r.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
