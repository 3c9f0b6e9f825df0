use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shift_pmle::blocks::BlockScheme;
use shift_pmle::estimator::{estimate_with, write_trace, EstimateOptions};
use shift_pmle::experiments::{
    pinsker_check, oracle_gap_check, run_monte_carlo, write_pinsker_csv, write_oracle_gap_csv,
    ExperimentConfig,
};
use shift_pmle::filters::{
    monotone_oracle, oracle_blockwise, pinsker_filter, risk_by_block, stein_filter, Filter,
};
use shift_pmle::noise::{simulate_path, simulate_sequence, Observation};
use shift_pmle::rng::substream;
use shift_pmle::signal::{FourierSignal, PRESET_NAMES};
use shift_pmle::Result;

#[derive(Parser)]
#[command(name = "shift-pmle", version, about = "Adaptive shift estimation in the periodic white-noise model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterKind {
    Oracle,
    Stein,
    Pinsker,
    Monotone,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an observation and write it as JSON.
    Simulate {
        /// Preset name or path to a {"coeffs": [...]} file.
        #[arg(long, default_value = "fixture")]
        signal: String,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        eps: f64,
        /// Number of coefficient pairs; defaults to N_ε for β* = 2 or the signal length.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Simulate the discretized path on this many cells and extract coefficients from it.
        #[arg(long)]
        path_cells: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write (k, x_k, x_k*) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the block scheme as CSV.
    Blocks {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        beta_star: f64,
    },
    /// Risk of a filter, in total and per block, as CSV.
    Risk {
        #[arg(long, default_value = "fixture")]
        signal: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        filter: FilterKind,
        #[arg(long, default_value_t = 2.0)]
        beta_star: f64,
        /// Observation file for the Stein filter.
        #[arg(long)]
        obs: Option<PathBuf>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "l")]
        l: Option<f64>,
    },
    /// Estimate the shift from an observation file.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        beta_star: f64,
        #[arg(long)]
        clamp: Option<f64>,
        /// Write (tau, phi, d1, d2) over the search interval as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Monte Carlo risk experiment.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Worst-case Sobolev risk of the Pinsker filter against its asymptotic constant.
    PinskerCheck {
        #[arg(long)]
        beta: f64,
        #[arg(long = "l")]
        l: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-4, 1e-5, 1e-6, 1e-7])]
        eps: Vec<f64>,
    },
    /// Blockwise oracle against the monotone oracle over an ε and β* grid.
    OracleGapCheck {
        /// Signals to check; defaults to every preset.
        #[arg(long, value_delimiter = ',')]
        signal: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6])]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.25, 1.5, 2.0])]
        beta_star: Vec<f64>,
    },
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { signal, theta, eps, k, seed, path_cells, output, csv } => {
            let f = FourierSignal::load(&signal)?;
            let len = match k {
                Some(k) => k,
                None => shift_pmle::blocks::n_eps(eps, 2.0)?.max(f.len()),
            };
            let mut rng = substream(seed, 0);
            let obs = match path_cells {
                Some(m) => simulate_path(&f, theta, eps, m, &mut rng)?.extract_coefficients(len)?,
                None => simulate_sequence(&f, theta, eps, len, &mut rng)?,
            };
            let mut out = open_output(output.as_ref())?;
            serde_json::to_writer(&mut out, &obs)?;
            writeln!(out)?;
            if let Some(p) = csv {
                obs.write_csv(BufWriter::new(File::create(p)?))?;
            }
        }
        Command::Blocks { eps, beta_star } => {
            BlockScheme::build(eps, beta_star)?.write_csv(io::stdout().lock())?;
        }
        Command::Risk { signal, eps, filter, beta_star, obs, beta, l } => {
            let f = FourierSignal::load(&signal)?;
            let scheme = BlockScheme::build(eps, beta_star)?;
            let h: Filter = match filter {
                FilterKind::Oracle => oracle_blockwise(&f, &scheme, eps),
                FilterKind::Monotone => monotone_oracle(&f, eps, scheme.n())?,
                FilterKind::Pinsker => {
                    let (beta, l) = beta.zip(l).ok_or_else(|| {
                        shift_pmle::Error::InvalidParameter {
                            name: "beta/l",
                            reason: "the pinsker filter needs --beta and --l".into(),
                        }
                    })?;
                    pinsker_filter(beta, l, eps, scheme.n(), true)?
                }
                FilterKind::Stein => {
                    let path = obs.ok_or_else(|| shift_pmle::Error::InvalidParameter {
                        name: "obs",
                        reason: "the stein filter needs --obs".into(),
                    })?;
                    let obs: Observation = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    stein_filter(&obs, &scheme)?
                }
            };
            let breakdown = risk_by_block(&f, &h, &scheme, eps);
            let mut out = io::stdout().lock();
            writeln!(out, "block,lo,hi,h,risk")?;
            for (j, (r, v)) in scheme.blocks().zip(&breakdown.per_block).enumerate() {
                writeln!(out, "{},{},{},{},{}", j + 1, r.start, r.end - 1, h.get(r.start), v)?;
            }
            writeln!(out, "tail,{},,0,{}", scheme.n() + 1, breakdown.beyond)?;
            writeln!(out, "total,,,,{}", breakdown.total())?;
        }
        Command::Estimate { input, beta_star, clamp, trace } => {
            let obs: Observation = serde_json::from_str(&std::fs::read_to_string(&input)?)?;
            let opts = EstimateOptions { clamp, ..Default::default() };
            let report = estimate_with(&obs, beta_star, &opts)?;
            if let Some(p) = trace {
                write_trace(
                    &obs,
                    &report.filter,
                    report.theta_prelim,
                    report.delta_effective,
                    257,
                    BufWriter::new(File::create(p)?),
                )?;
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(report.converged);
        }
        Command::Mc { config, seed, workers } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_monte_carlo(&cfg, workers)?;
            match &cfg.output {
                Some(path) => report.save(path)?,
                None => report.write_csv(io::stdout().lock())?,
            }
        }
        Command::PinskerCheck { beta, l, eps } => {
            let rows = pinsker_check(beta, l, &eps)?;
            write_pinsker_csv(&rows, io::stdout().lock())?;
        }
        Command::OracleGapCheck { signal, eps, beta_star } => {
            let names: Vec<String> = if signal.is_empty() {
                PRESET_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                signal
            };
            let mut all_pass = true;
            let mut out = io::stdout().lock();
            writeln!(out, "signal,eps,beta_star,blocks,gamma,oracle_risk,monotone_risk,bound,status")?;
            for name in &names {
                let f = FourierSignal::load(name)?;
                let rows = oracle_gap_check(&f, &eps, &beta_star)?;
                all_pass &= rows.iter().all(|r| r.pass);
                let mut buf = Vec::new();
                write_oracle_gap_csv(&rows, &mut buf)?;
                for line in String::from_utf8_lossy(&buf).lines().skip(1) {
                    writeln!(out, "{name},{line}")?;
                }
            }
            return Ok(all_pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
