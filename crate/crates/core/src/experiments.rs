//! Monte Carlo risk harness and deterministic checks.
//!
//! Replication `r` at grid point `e` always draws from ChaCha stream
//! `(e << 32) | r` of the master seed, and results are aggregated in index
//! order, so reports are byte-identical for any worker count.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{n_eps, BlockScheme};
use crate::error::{Error, Result};
use crate::estimator::{estimate_with_filter, preliminary, EstimateOptions};
use crate::filters::{
    monotone_oracle, oracle_blockwise, pinsker_constant, pinsker_filter, pinsker_width, risk,
    stein_filter, worst_case_sobolev_risk,
};
use crate::noise::{drift_only, simulate_sequence};
use crate::rng::{replication_stream, substream};
use crate::signal::FourierSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Stein,
    OracleFilter,
    PinskerFilter,
    PreliminaryOnly,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Stein => "stein",
            EstimatorKind::OracleFilter => "oracle-filter",
            EstimatorKind::PinskerFilter => "pinsker-filter",
            EstimatorKind::PreliminaryOnly => "preliminary-only",
        }
    }
}

/// A preset name or an inline coefficient list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Named(String),
    Inline(FourierSignal),
}

impl SignalSpec {
    pub fn resolve(&self) -> Result<FourierSignal> {
        match self {
            SignalSpec::Named(name) => FourierSignal::load(name),
            SignalSpec::Inline(f) => Ok(f.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinskerParams {
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal: SignalSpec,
    pub theta: f64,
    pub eps_list: Vec<f64>,
    pub replications: u32,
    pub seed: u64,
    pub beta_star: f64,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub pinsker: Option<PinskerParams>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Replace every noise draw by zero.
    #[doc(hidden)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub noiseless: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<FourierSignal> {
        if self.replications < 1 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        if self.eps_list.is_empty() {
            return Err(Error::param("eps_list", "must not be empty"));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::param("eps_list", format!("every ε must lie in (0, 1), got {e}")));
        }
        if self.estimators.is_empty() {
            return Err(Error::param("estimators", "must not be empty"));
        }
        if !(self.beta_star > 1.0) {
            return Err(Error::param("beta_star", "must exceed 1"));
        }
        if self.estimators.contains(&EstimatorKind::PinskerFilter) && self.pinsker.is_none() {
            return Err(Error::param("pinsker", "required when the pinsker-filter estimator is selected"));
        }
        if let Some(p) = &self.pinsker {
            pinsker_constant(p.beta, p.l)?;
        }
        if !self.theta.is_finite() {
            return Err(Error::param("theta", "must be finite"));
        }
        let f = self.signal.resolve()?;
        if f.deriv_norm_sq() == 0.0 {
            return Err(Error::param("signal", "‖f′‖ must be positive to normalize the risk"));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRow {
    pub eps: f64,
    pub estimator: EstimatorKind,
    pub replications: u32,
    pub n_failures: u32,
    /// `ε⁻² ‖f′‖² · mean (θ̂ − θ)²` over successful replications.
    pub normalized_risk: f64,
    pub std_error: f64,
    /// `1 + R^ε[f,h*] / ‖f′‖²`.
    pub oracle_bound: f64,
    /// `1 + γ_ε min_mon R^ε / ‖f′‖²`.
    pub monotone_bound: f64,
    pub second_order_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub theta: f64,
    pub seed: u64,
    pub beta_star: f64,
    pub deriv_norm_sq: f64,
    pub rows: Vec<RiskRow>,
}

impl RiskReport {
    pub fn row(&self, eps: f64, estimator: EstimatorKind) -> Option<&RiskRow> {
        self.rows.iter().find(|r| r.eps == eps && r.estimator == estimator)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "eps,estimator,replications,n_failures,normalized_risk,std_error,oracle_bound,monotone_bound,second_order_excess"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.eps,
                r.estimator.name(),
                r.replications,
                r.n_failures,
                r.normalized_risk,
                r.std_error,
                r.oracle_bound,
                r.monotone_bound,
                r.second_order_excess
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Writes `<output>` as CSV and `<output>.json` alongside it.
    pub fn save(&self, output: &Path) -> Result<()> {
        std::fs::write(output, self.to_csv_string())?;
        let mut json_path = output.as_os_str().to_owned();
        json_path.push(".json");
        std::fs::write(json_path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-ε quantities shared by all replications.
struct GridPoint {
    eps: f64,
    scheme: BlockScheme,
    len: usize,
    oracle: crate::filters::Filter,
    pinsker: Option<crate::filters::Filter>,
}

/// Squared errors (or `None` for a failed replication) for each requested estimator.
fn replicate(
    cfg: &ExperimentConfig,
    f: &FourierSignal,
    point: &GridPoint,
    stream: u64,
) -> Result<Vec<Option<f64>>> {
    let obs = if cfg.noiseless {
        drift_only(f, cfg.theta, point.eps, point.len)?
    } else {
        let mut rng = substream(cfg.seed, stream);
        simulate_sequence(f, cfg.theta, point.eps, point.len, &mut rng)?
    };
    let opts = EstimateOptions::default();
    let n = point.scheme.n();
    cfg.estimators
        .iter()
        .map(|kind| {
            let report = match kind {
                EstimatorKind::PreliminaryOnly => {
                    return Ok(Some((preliminary(&obs) - cfg.theta).powi(2)));
                }
                EstimatorKind::Stein => {
                    estimate_with_filter(&obs, stein_filter(&obs, &point.scheme)?, n, &opts)?
                }
                EstimatorKind::OracleFilter => estimate_with_filter(&obs, point.oracle.clone(), n, &opts)?,
                EstimatorKind::PinskerFilter => {
                    let h = point.pinsker.clone().expect("validated");
                    estimate_with_filter(&obs, h, n, &opts)?
                }
            };
            Ok(report
                .converged
                .then(|| (report.theta_hat - cfg.theta).powi(2)))
        })
        .collect()
}

/// Runs every (ε, estimator) cell on `workers` threads (`None` uses rayon's default).
pub fn run_monte_carlo(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RiskReport> {
    let f = cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;

    let fp2 = f.deriv_norm_sq();
    let mut rows = Vec::new();
    for (e_idx, &eps) in cfg.eps_list.iter().enumerate() {
        let scheme = BlockScheme::build(eps, cfg.beta_star)?;
        let n = scheme.n();
        let len = n.max(f.len()).max(n_eps(eps, cfg.beta_star)?);
        let oracle = oracle_blockwise(&f, &scheme, eps);
        let pinsker = match cfg.pinsker {
            Some(p) if cfg.estimators.contains(&EstimatorKind::PinskerFilter) => {
                Some(pinsker_filter(p.beta, p.l, eps, n, true)?)
            }
            _ => None,
        };
        let oracle_risk = risk(&f, &oracle, eps);
        let mono_risk = risk(&f, &monotone_oracle(&f, eps, n)?, eps);
        let oracle_bound = 1.0 + oracle_risk / fp2;
        let monotone_bound = 1.0 + scheme.gamma() * mono_risk / fp2;
        let point = GridPoint { eps, scheme, len, oracle, pinsker };

        let e_idx = u32::try_from(e_idx).map_err(|_| Error::param("eps_list", "too many entries"))?;
        let per_rep: Vec<Vec<Option<f64>>> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| replicate(cfg, &f, &point, replication_stream(e_idx, r)))
                .collect::<Result<Vec<_>>>()
        })?;

        let scale = fp2 / (eps * eps);
        for (i, &kind) in cfg.estimators.iter().enumerate() {
            let normalized: Vec<f64> = per_rep.iter().filter_map(|v| v[i]).map(|e| e * scale).collect();
            let n_failures = cfg.replications - normalized.len() as u32;
            let (normalized_risk, std_error) = mean_and_se(&normalized);
            rows.push(RiskRow {
                eps,
                estimator: kind,
                replications: cfg.replications,
                n_failures,
                normalized_risk,
                std_error,
                oracle_bound,
                monotone_bound,
                second_order_excess: normalized_risk - 1.0,
            });
        }
    }
    Ok(RiskReport {
        theta: cfg.theta,
        seed: cfg.seed,
        beta_star: cfg.beta_star,
        deriv_norm_sq: fp2,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinskerRow {
    pub eps: f64,
    pub width: f64,
    pub n: usize,
    pub worst_case_risk: f64,
    /// `C(β,L) ε^{(4β−4)/(2β+1)}`.
    pub asymptotic: f64,
    pub ratio: f64,
}

/// Worst-case Sobolev risk of the plain Pinsker filter against its asymptotic value.
pub fn pinsker_check(beta: f64, l: f64, eps_list: &[f64]) -> Result<Vec<PinskerRow>> {
    let c = pinsker_constant(beta, l)?;
    eps_list
        .iter()
        .map(|&eps| {
            let width = pinsker_width(beta, l, eps)?;
            // the filter vanishes from W_ε on
            let n = width.ceil() as usize + 1;
            let h = pinsker_filter(beta, l, eps, n, false)?;
            let worst_case_risk = worst_case_sobolev_risk(&h, beta, l, eps)?;
            let asymptotic = c * eps.powf((4.0 * beta - 4.0) / (2.0 * beta + 1.0));
            Ok(PinskerRow {
                eps,
                width,
                n,
                worst_case_risk,
                asymptotic,
                ratio: worst_case_risk / asymptotic,
            })
        })
        .collect()
}

pub fn write_pinsker_csv<W: Write>(rows: &[PinskerRow], mut out: W) -> Result<()> {
    writeln!(out, "eps,width,n,worst_case_risk,asymptotic,ratio")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.eps, r.width, r.n, r.worst_case_risk, r.asymptotic, r.ratio
        )?;
    }
    Ok(())
}

/// Slack allowed in the blockwise-vs-monotone oracle comparison.
pub const ORACLE_GAP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleGapRow {
    pub eps: f64,
    pub beta_star: f64,
    pub blocks: usize,
    pub gamma: f64,
    /// `R^ε[f,h*]`.
    pub oracle_risk: f64,
    /// `min over nonincreasing h of R^ε[f,h]`.
    pub monotone_risk: f64,
    /// `γ · monotone_risk + ε² σ_1²`.
    pub bound: f64,
    pub pass: bool,
}

/// Checks `R^ε[f,h*] ≤ γ_ε min_mon R^ε[f,h] + ε²σ_1²` on the blocks built at each grid point.
pub fn oracle_gap_check(f: &FourierSignal, eps_list: &[f64], beta_stars: &[f64]) -> Result<Vec<OracleGapRow>> {
    let mut rows = Vec::new();
    for &beta_star in beta_stars {
        for &eps in eps_list {
            let scheme = BlockScheme::build(eps, beta_star)?;
            rows.push(blockwise_vs_monotone(f, &scheme, beta_star)?);
        }
    }
    Ok(rows)
}

/// One comparison on an explicit scheme.
pub fn blockwise_vs_monotone(f: &FourierSignal, scheme: &BlockScheme, beta_star: f64) -> Result<OracleGapRow> {
    let eps = scheme.eps();
    let oracle_risk = risk(f, &oracle_blockwise(f, scheme, eps), eps);
    let monotone_risk = risk(f, &monotone_oracle(f, eps, scheme.n())?, eps);
    let gamma = scheme.gamma();
    let bound = gamma * monotone_risk + eps * eps * scheme.sigma_sq()[0];
    Ok(OracleGapRow {
        eps,
        beta_star,
        blocks: scheme.num_blocks(),
        gamma,
        oracle_risk,
        monotone_risk,
        bound,
        pass: oracle_risk <= bound + ORACLE_GAP_SLACK,
    })
}

pub fn write_oracle_gap_csv<W: Write>(rows: &[OracleGapRow], mut out: W) -> Result<()> {
    writeln!(out, "eps,beta_star,blocks,gamma,oracle_risk,monotone_risk,bound,status")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.eps,
            r.beta_star,
            r.blocks,
            r.gamma,
            r.oracle_risk,
            r.monotone_risk,
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}
