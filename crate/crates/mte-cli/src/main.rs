//! `mte`: command-line front end for the toolkit.
//!
//! One binary, one subcommand per module. All randomness flows from the
//! `--seed` flag through deterministic per-task stream derivation, so any
//! two runs with the same configuration produce byte-identical outputs.

mod reproduce;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use mte_core::bignat::BigNat;
use mte_core::bitstring::BitString;
use mte_core::empirics::{
    codelength_histogram, fit_scaled_with, ingest_debian, ingest_plain, ingest_pypi,
    kl_divergence, model_pure_omega, model_scaled, model_uniform, Ingest,
};
use mte_core::engine::simulate;
use mte_core::omega::{omega_decode, omega_encode, omega_len};
use mte_core::prior::{build_prior, PrimePrior};
use mte_core::ptm::{
    ensemble_sample, prime_conditional_exact, sample_prime_filtered, Ensemble, EnsembleMode,
    PtmParams, DEFAULT_MAX_ATTEMPTS,
};
use mte_core::rng::task_rng;
use mte_core::tails::{
    conditional_gap_tail_exact, default_fit_window, dkw_epsilon, dkw_violations, empirical_ccdf,
    hill_estimator, loglog_slope, mixture_gap_tail, MixingMeasure,
};
use serde::Serialize;

/// Environment variable that overrides the default output directory for
/// relative `--out` paths.
const OUT_DIR_ENV: &str = "MTE_OUT_DIR";

#[derive(Parser)]
#[command(name = "mte", version, about = "Multiplicative Turing Ensemble toolkit")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file (defaults to stdout). Relative paths resolve under
    /// $MTE_OUT_DIR when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular results.
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Elias omega coding of decimal integers.
    Omega {
        #[command(subcommand)]
        op: OmegaOp,
    },
    /// Gibbs priors on primes.
    Prior {
        #[command(subcommand)]
        op: PriorOp,
    },
    /// Probabilistic machines and ensembles.
    Ptm {
        #[command(subcommand)]
        op: PtmOp,
    },
    /// Simulate multiplicative trajectories; CSV columns
    /// seed,t,prime,log2_X,len_X.
    Simulate {
        /// Prior JSON produced by `prior build`.
        #[arg(long)]
        prior: PathBuf,
        /// Steps per trajectory.
        #[arg(long)]
        steps: u64,
        /// Number of independent trajectories (seeds seed..seed+K-1).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Record every M-th step (the final step is always recorded).
        #[arg(long, default_value_t = 100)]
        thin: u64,
    },
    /// Gap-tail diagnostics against the exact oracle.
    Tails {
        #[command(subcommand)]
        op: TailsOp,
    },
    /// Codelength histogram fitting on a size dataset.
    Fit {
        /// Input file (or directory of JSON documents for --format pypi).
        #[arg(long)]
        input: PathBuf,
        /// Dataset format.
        #[arg(long, value_enum, default_value_t = DataFormat::Plain)]
        format: DataFormat,
        /// Also emit a plotting CSV (l, P_obs, P_uniform, P_pure, P_scaled).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Report divergences and decay in bits instead of nats.
        #[arg(long)]
        bits: bool,
        /// Count-weighted least squares instead of the plain protocol.
        #[arg(long)]
        weighted: bool,
    },
    /// Fixed-seed experiment suites with pass/fail reports.
    Reproduce {
        #[command(subcommand)]
        suite: reproduce::Suite,
    },
}

#[derive(Subcommand)]
enum OmegaOp {
    /// Print the codeword of n as ASCII bits.
    Encode { n: String },
    /// Decode one codeword from an ASCII bit string.
    Decode { bits: String },
    /// Print the codeword length of n.
    Len { n: String },
}

#[derive(Subcommand)]
enum PriorOp {
    /// Build a prior and emit it as JSON {beta, p_max, primes, masses}.
    Build {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        pmax: u64,
    },
    /// Emit per-prime tail/moment diagnostics as CSV (prime, mass,
    /// tail_mass) with a trailing JSON moments line on stderr.
    Diag {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        pmax: u64,
    },
}

#[derive(Subcommand)]
enum PtmOp {
    /// Draw prime-filtered samples, one per line.
    Sample {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        ps: f64,
        #[arg(long, default_value_t = 10)]
        n: u64,
    },
    /// Exact prime-conditional law as CSV (prime, mass).
    Law {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        ps: f64,
        #[arg(long, default_value_t = 1000)]
        pmax: u64,
    },
    /// Empirical ensemble law under a sampling mode, as CSV
    /// (prime, frequency).
    Equiv {
        /// Ensemble JSON {components: [{p0,p1,ps}...], weights: [...]}.
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 10_000)]
        n: u64,
    },
}

#[derive(Subcommand)]
enum TailsOp {
    /// Conditional gap tail at a fixed state x.
    Conditional {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        /// Hill order-statistic count (default ceil(sqrt(N))).
        #[arg(long)]
        hill_k: Option<usize>,
        /// CSV destination for (u, empirical_survival, exact_survival).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Unconditional gap tail under a mixing measure.
    Mixture {
        #[arg(long)]
        prior: PathBuf,
        /// Mixing measure JSON {atoms: [[x, weight], ...]}.
        #[arg(long)]
        nu: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long)]
        hill_k: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Plain,
    Debian,
    Pypi,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Resolve an output path against $MTE_OUT_DIR for relative paths.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, content)?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn load_prior(path: &Path) -> Result<PrimePrior, Box<dyn std::error::Error>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[derive(Serialize)]
struct TailSummary {
    seed: u64,
    n: u64,
    /// `null` when the fit window is degenerate (tiny priors).
    slope: Option<f64>,
    /// `null` for constant tails (the +inf sentinel is not JSON).
    hill_index: Option<f64>,
    dkw_violations: usize,
    dkw_epsilon: f64,
    fit_window: Option<(f64, f64)>,
}

fn tail_report(
    samples: &[f64],
    support: &[f64],
    exact: impl Fn(f64) -> f64,
    u_max: f64,
    hill_k: Option<usize>,
    seed: u64,
    csv: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<(), Box<dyn std::error::Error>> {
    let n = samples.len();
    let ccdf = empirical_ccdf(samples)?;
    let eps = dkw_epsilon(n, 1e-6);
    let violations = dkw_violations(&ccdf, support, &exact, eps);

    if let Some(csv_path) = csv {
        let mut body = String::from("u,empirical_survival,exact_survival\n");
        for &u in support {
            body.push_str(&format!("{u},{},{}\n", ccdf.survival(u), exact(u)));
        }
        write_output(&Some(csv_path.clone()), &body)?;
    }

    let window = default_fit_window(&exact, u_max, n).ok();
    let slope = window.and_then(|(lo, hi)| loglog_slope(&ccdf, lo, hi).ok());
    let k = hill_k.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize);
    let positive: Vec<f64> = samples.iter().copied().filter(|&v| v > 0.0).collect();
    let hill_index = hill_estimator(&positive, k.min(positive.len().saturating_sub(1)))
        .ok()
        .filter(|v| v.is_finite());
    let summary = TailSummary {
        seed,
        n: n as u64,
        slope,
        hill_index,
        dkw_violations: violations,
        dkw_epsilon: eps,
        fit_window: window,
    };
    write_output(out, &format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    Ok(())
}

fn ingest(input: &Path, format: DataFormat) -> Result<Ingest, Box<dyn std::error::Error>> {
    Ok(match format {
        DataFormat::Plain => ingest_plain(&fs::read_to_string(input)?)?,
        DataFormat::Debian => ingest_debian(&fs::read_to_string(input)?)?,
        DataFormat::Pypi => {
            let mut total = Ingest::default();
            if input.is_dir() {
                let mut paths: Vec<PathBuf> = fs::read_dir(input)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|e| e == "json"))
                    .collect();
                paths.sort();
                for p in paths {
                    let one = ingest_pypi(&p.display().to_string(), &fs::read_to_string(&p)?)?;
                    total.sizes.extend(one.sizes);
                    total.skipped += one.skipped;
                }
            } else {
                total = ingest_pypi(&input.display().to_string(), &fs::read_to_string(input)?)?;
            }
            total
        }
    })
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Omega { op } => match op {
            OmegaOp::Encode { n } => {
                let n = BigNat::from_str(&n)?;
                write_output(&cli.out, &format!("{}\n", omega_encode(&n)?))?;
            }
            OmegaOp::Decode { bits } => {
                let bits = BitString::from_str(&bits)?;
                let (n, consumed) = omega_decode(&bits)?;
                if consumed < bits.len() {
                    eprintln!("note: {} trailing bits left undecoded", bits.len() - consumed);
                }
                write_output(&cli.out, &format!("{n}\n"))?;
            }
            OmegaOp::Len { n } => {
                let n = BigNat::from_str(&n)?;
                write_output(&cli.out, &format!("{}\n", omega_len(&n)?))?;
            }
        },

        Cmd::Prior { op } => match op {
            PriorOp::Build { beta, pmax } => {
                let prior = build_prior(beta, pmax)?;
                match cli.format {
                    OutFormat::Json => write_output(
                        &cli.out,
                        &format!("{}\n", serde_json::to_string_pretty(&prior)?),
                    )?,
                    OutFormat::Csv => {
                        let mut body = String::from("prime,mass\n");
                        for (p, m) in prior.primes().iter().zip(prior.masses()) {
                            body.push_str(&format!("{p},{m}\n"));
                        }
                        write_output(&cli.out, &body)?;
                    }
                }
            }
            PriorOp::Diag { beta, pmax } => {
                let prior = build_prior(beta, pmax)?;
                let mut body = String::from("prime,mass,tail_mass\n");
                for (p, m) in prior.primes().iter().zip(prior.masses()) {
                    body.push_str(&format!("{p},{m},{}\n", prior.tail_mass(*p as f64)));
                }
                write_output(&cli.out, &body)?;
                let m = prior.moments();
                eprintln!("{}", serde_json::to_string(&m)?);
            }
        },

        Cmd::Ptm { op } => match op {
            PtmOp::Sample { p0, p1, ps, n } => {
                let params = PtmParams::new(p0, p1, ps)?;
                let mut rng = task_rng(cli.seed, 0);
                let mut body = String::new();
                for _ in 0..n {
                    let p = sample_prime_filtered(&params, &mut rng, DEFAULT_MAX_ATTEMPTS)?;
                    body.push_str(&format!("{p}\n"));
                }
                write_output(&cli.out, &body)?;
            }
            PtmOp::Law { p0, p1, ps, pmax } => {
                let params = PtmParams::new(p0, p1, ps)?;
                let law = prime_conditional_exact(&params, pmax)?;
                let mut body = String::from("prime,mass\n");
                for (p, m) in law.primes.iter().zip(&law.masses) {
                    body.push_str(&format!("{p},{m}\n"));
                }
                write_output(&cli.out, &body)?;
            }
            PtmOp::Equiv { ensemble, mode, n } => {
                let ens: Ensemble = serde_json::from_str(&fs::read_to_string(&ensemble)?)?;
                let mode = EnsembleMode::from_str(&mode)?;
                let mut rng = task_rng(cli.seed, 0);
                let mut counts = std::collections::BTreeMap::new();
                for _ in 0..n {
                    let p = ensemble_sample(&ens, mode, &mut rng)?;
                    *counts.entry(p.to_string()).or_insert(0u64) += 1;
                }
                let mut body = String::from("prime,frequency\n");
                for (p, c) in counts {
                    body.push_str(&format!("{p},{}\n", c as f64 / n as f64));
                }
                write_output(&cli.out, &body)?;
            }
        },

        Cmd::Simulate {
            prior,
            steps,
            seeds,
            thin,
        } => {
            let prior = load_prior(&prior)?;
            let mut body = String::from("seed,t,prime,log2_X,len_X\n");
            for k in 0..seeds {
                let seed = cli.seed + k;
                let traj = simulate(&prior, steps, seed, thin)?;
                for s in &traj.steps {
                    body.push_str(&format!(
                        "{seed},{},{},{},{}\n",
                        s.t, s.prime, s.log2_x, s.len_x
                    ));
                }
            }
            write_output(&cli.out, &body)?;
        }

        Cmd::Tails { op } => match op {
            TailsOp::Conditional {
                prior,
                x,
                n,
                hill_k,
                csv,
            } => {
                let prior = load_prior(&prior)?;
                let mut rng = task_rng(cli.seed, 0);
                let samples = mte_core::engine::gap_samples(&prior, x, n, &mut rng)?;
                let support: Vec<f64> =
                    prior.primes().iter().map(|&p| x * (p - 1) as f64).collect();
                let u_max = x * (prior.p_max() as f64 - 1.0);
                tail_report(
                    &samples,
                    &support,
                    |u| conditional_gap_tail_exact(&prior, x, u),
                    u_max,
                    hill_k,
                    cli.seed,
                    &csv,
                    &cli.out,
                )?;
            }
            TailsOp::Mixture {
                prior,
                nu,
                n,
                hill_k,
                csv,
            } => {
                let prior = load_prior(&prior)?;
                let nu: MixingMeasure = serde_json::from_str(&fs::read_to_string(&nu)?)?;
                let mut rng = task_rng(cli.seed, 0);
                let samples: Vec<f64> = (0..n)
                    .map(|_| {
                        let x = nu.sample_x(&mut rng);
                        x * (prior.sample_prime(&mut rng) - 1) as f64
                    })
                    .collect();
                let mut support: Vec<f64> = nu
                    .atoms()
                    .iter()
                    .flat_map(|&(x, _)| {
                        prior.primes().iter().map(move |&p| x * (p - 1) as f64)
                    })
                    .collect();
                support.sort_by(f64::total_cmp);
                support.dedup();
                let x_max = nu.atoms().iter().map(|&(x, _)| x).fold(0.0, f64::max);
                let u_max = x_max * (prior.p_max() as f64 - 1.0);
                tail_report(
                    &samples,
                    &support,
                    |u| mixture_gap_tail(&prior, &nu, u),
                    u_max,
                    hill_k,
                    cli.seed,
                    &csv,
                    &cli.out,
                )?;
            }
        },

        Cmd::Fit {
            input,
            format,
            csv,
            bits,
            weighted,
        } => {
            let data = ingest(&input, format)?;
            let hist = codelength_histogram(&data.sizes)?;
            let fit = fit_scaled_with(&hist, weighted)?;
            let obs = hist.probs();
            let uniform = model_uniform(&hist);
            let pure = model_pure_omega(&hist);
            let scaled = model_scaled(&hist, &fit);
            let scale = if bits { 1.0 / std::f64::consts::LN_2 } else { 1.0 };

            #[derive(Serialize)]
            struct Report {
                unit: &'static str,
                bins: Vec<u64>,
                probs: Vec<f64>,
                kl_uniform: f64,
                kl_pure: f64,
                kl_scaled: f64,
                a: f64,
                c: f64,
                residual: f64,
                skipped: u64,
            }
            let report = Report {
                unit: if bits { "bits" } else { "nats" },
                bins: hist.lens(),
                probs: obs.clone(),
                kl_uniform: scale * kl_divergence(&obs, &uniform)?,
                kl_pure: scale * kl_divergence(&obs, &pure)?,
                kl_scaled: scale * kl_divergence(&obs, &scaled)?,
                a: scale * fit.a,
                c: scale * fit.c,
                residual: scale * fit.residual,
                skipped: data.skipped,
            };
            if let Some(csv_path) = &csv {
                let mut body = String::from("l,P_obs,P_uniform,P_pure,P_scaled\n");
                for (i, l) in hist.lens().iter().enumerate() {
                    body.push_str(&format!(
                        "{l},{},{},{},{}\n",
                        obs[i], uniform[i], pure[i], scaled[i]
                    ));
                }
                write_output(&Some(csv_path.clone()), &body)?;
            }
            write_output(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
        }

        Cmd::Reproduce { suite } => {
            let failures = reproduce::run(suite, cli.seed, &cli.out)?;
            if failures > 0 {
                return Err(format!("{failures} reproduction check(s) failed").into());
            }
        }
    }
    Ok(())
}
