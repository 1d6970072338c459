//! Fixed-seed experiment suites mirroring the acceptance checks, with
//! machine-readable reports and plot-ready CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use mte_core::empirics::{
    codelength_histogram, fit_scaled, kl_divergence, model_pure_omega, model_scaled,
    model_uniform, synthetic_sizes,
};
use mte_core::engine::{averaging_series, gap_samples, simulate};
use mte_core::prior::build_prior;
use mte_core::rng::task_rng;
use mte_core::tails::{
    conditional_gap_tail_exact, dkw_epsilon, dkw_violations, empirical_ccdf,
    slow_variation_adjusted_slope,
};
use serde::Serialize;

#[derive(Subcommand, Clone, Copy)]
pub enum Suite {
    /// Gap-tail slopes and DKW band checks.
    Tails,
    /// Trajectory averaging against exact moments.
    Averaging,
    /// Histogram-fitting pipeline on synthetic ground truth.
    EmpiricsSynthetic,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Tails => "tails",
            Suite::Averaging => "averaging",
            Suite::EmpiricsSynthetic => "empirics-synthetic",
        }
    }
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    suite: &'static str,
    seed: u64,
    checks: Vec<Check>,
}

fn check(checks: &mut Vec<Check>, name: &str, pass: bool, detail: String) {
    checks.push(Check {
        name: name.to_string(),
        pass,
        detail,
    });
}

/// Run a suite, write its report directory, and return the failure count.
pub fn run(
    suite: Suite,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<usize, Box<dyn std::error::Error>> {
    let dir = match out {
        Some(p) => p.clone(),
        None => PathBuf::from(format!("mte-report-{}", suite.name())),
    };
    let dir = if dir.is_relative() {
        match std::env::var(super::OUT_DIR_ENV) {
            Ok(base) => PathBuf::from(base).join(dir),
            Err(_) => dir,
        }
    } else {
        dir
    };
    fs::create_dir_all(&dir)?;

    let checks = match suite {
        Suite::Tails => tails_suite(seed, &dir)?,
        Suite::Averaging => averaging_suite(seed, &dir)?,
        Suite::EmpiricsSynthetic => empirics_suite(seed, &dir)?,
    };
    let failures = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let report = Report {
        suite: suite.name(),
        seed,
        checks,
    };
    fs::write(
        dir.join("report.json"),
        format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    Ok(failures)
}

fn tails_suite(seed: u64, dir: &Path) -> Result<Vec<Check>, Box<dyn std::error::Error>> {
    let mut checks = Vec::new();

    // regular-variation slopes of the exact survival, octave-aligned window
    // inside one smooth codelength segment (see the fit-window notes in the
    // acceptance suite)
    for beta in [1.5f64, 2.0, 3.0] {
        let prior = build_prior(beta, 10_000_000)?;
        let pts = 16;
        let ys: Vec<f64> = (0..=(6 * pts))
            .map(|i| 2f64.powf(16.0 + i as f64 / pts as f64))
            .collect();
        let surv: Vec<f64> = ys.iter().map(|&y| prior.tail_mass(y)).collect();
        let mut body = String::from("y,tail_mass\n");
        for (y, s) in ys.iter().zip(&surv) {
            body.push_str(&format!("{y},{s}\n"));
        }
        fs::write(dir.join(format!("tail-beta-{beta}.csv")), body)?;
        let slope = slow_variation_adjusted_slope(&ys, &surv, beta)?;
        let err = slope - (1.0 - beta);
        check(
            &mut checks,
            &format!("slope beta={beta}"),
            err.abs() <= 0.15,
            format!("slope {slope:.3} vs 1-beta = {:.1} ({err:+.3})", 1.0 - beta),
        );
    }

    // DKW band around the conditional oracle at three states
    let prior = build_prior(2.0, 1_000_000)?;
    let n = 1_000_000u64;
    let eps = dkw_epsilon(n as usize, 1e-6);
    for (task, x) in [1.0f64, 10.0, 1000.0].into_iter().enumerate() {
        let mut rng = task_rng(seed, task as u64);
        let samples = gap_samples(&prior, x, n, &mut rng)?;
        let ccdf = empirical_ccdf(&samples)?;
        let support: Vec<f64> = prior.primes().iter().map(|&p| x * (p - 1) as f64).collect();
        let bad = dkw_violations(&ccdf, &support, |u| conditional_gap_tail_exact(&prior, x, u), eps);
        check(
            &mut checks,
            &format!("dkw x={x}"),
            bad == 0,
            format!("{bad} of {} support points outside the band (eps {eps:.5})", support.len()),
        );
    }
    Ok(checks)
}

fn averaging_suite(seed: u64, dir: &Path) -> Result<Vec<Check>, Box<dyn std::error::Error>> {
    let mut checks = Vec::new();
    let prior = build_prior(2.0, 1_000_000)?;
    let m = prior.moments();
    let mut body = String::from("seed,len_X_over_T,running_mean_len_P,log2_X_over_T\n");
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    for k in 0..32u64 {
        let traj = simulate(&prior, 10_000, seed + k, 100)?;
        let series = averaging_series(&traj)?;
        let last = series.last().unwrap();
        body.push_str(&format!(
            "{},{},{},{}\n",
            seed + k,
            last.len_x_over_t,
            last.running_mean_len_p,
            last.log2_x_over_t
        ));
        worst1 = worst1.max((last.len_x_over_t - m.mean_log2_p).abs() / m.mean_log2_p);
        worst2 = worst2.max((last.running_mean_len_p - m.mean_len_p).abs() / m.mean_len_p);
    }
    fs::write(dir.join("terminal-ratios.csv"), body)?;
    check(
        &mut checks,
        "len_X/T vs E[log2 P]",
        worst1 <= 0.05,
        format!("worst deviation {:.2}% (target {:.4})", 100.0 * worst1, m.mean_log2_p),
    );
    check(
        &mut checks,
        "mean len(P) vs E[l(P)]",
        worst2 <= 0.05,
        format!("worst deviation {:.2}% (target {:.4})", 100.0 * worst2, m.mean_len_p),
    );
    Ok(checks)
}

fn empirics_suite(seed: u64, dir: &Path) -> Result<Vec<Check>, Box<dyn std::error::Error>> {
    let mut checks = Vec::new();
    let mut rng = task_rng(seed, 0);
    let sizes = synthetic_sizes(0.45, 24, 50_000, &mut rng)?;
    let hist = codelength_histogram(&sizes)?;
    let fit = fit_scaled(&hist)?;
    let obs = hist.probs();
    let uniform = model_uniform(&hist);
    let pure = model_pure_omega(&hist);
    let scaled = model_scaled(&hist, &fit);
    let kl_u = kl_divergence(&obs, &uniform)?;
    let kl_p = kl_divergence(&obs, &pure)?;
    let kl_s = kl_divergence(&obs, &scaled)?;

    let mut body = String::from("l,P_obs,P_uniform,P_pure,P_scaled\n");
    for (i, l) in hist.lens().iter().enumerate() {
        body.push_str(&format!(
            "{l},{},{},{},{}\n",
            obs[i], uniform[i], pure[i], scaled[i]
        ));
    }
    fs::write(dir.join("histogram-models.csv"), body)?;

    check(
        &mut checks,
        "fitted decay",
        (fit.a - 0.45).abs() <= 0.02,
        format!("a = {:.4} (target 0.45 +/- 0.02)", fit.a),
    );
    check(
        &mut checks,
        "scaled fit quality",
        kl_s < 0.01,
        format!("KL(obs||scaled) = {kl_s:.4} nats"),
    );
    check(
        &mut checks,
        "KL ordering scaled < uniform",
        kl_s < kl_u,
        format!("{kl_s:.4} vs {kl_u:.4}"),
    );
    // On ground truth with decay between 0 and ln 2 the pure model beats
    // uniform, so this stated ordering cannot hold; it is still asserted.
    check(
        &mut checks,
        "KL ordering uniform < pure",
        kl_u < kl_p,
        format!("{kl_u:.4} vs {kl_p:.4}"),
    );
    check(
        &mut checks,
        "soft check a < ln 2",
        fit.a < std::f64::consts::LN_2,
        format!("a = {:.4}, ln 2 = {:.4}", fit.a, std::f64::consts::LN_2),
    );
    Ok(checks)
}
