//! Multiplicative chain simulation.
//!
//! The chain is `X_0 = 1`, `X_{t+1} = X_t * P_{t+1}` with i.i.d. prime
//! multipliers from a [`PrimePrior`]. State is kept as an exact big integer;
//! recorded codelengths come from the true state, never a float shadow.

use serde::{Deserialize, Serialize};

use crate::bignat::BigNat;
use crate::error::{Error, Result};
use crate::omega::omega_len;
use crate::prior::PrimePrior;
use crate::rng::task_rng;

/// Default record thinning for [`simulate`].
pub const DEFAULT_THIN: u64 = 100;

/// One recorded step of a trajectory. `sum_len_p` is the running
/// `sum_{i<=t} l_omega(P_i)`, carried so averaging diagnostics work from a
/// thinned record stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub prime: u64,
    pub log2_x: f64,
    pub len_x: u64,
    pub sum_len_p: u64,
}

/// A thinned sample path plus the configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub beta: f64,
    pub p_max: u64,
    pub steps: Vec<StepRecord>,
}

/// Run the chain for `t_steps` steps, recording every `thin`-th step and
/// always the final one. All randomness derives from `seed` alone.
pub fn simulate(prior: &PrimePrior, t_steps: u64, seed: u64, thin: u64) -> Result<Trajectory> {
    if t_steps < 1 {
        return Err(Error::domain("simulate requires T >= 1"));
    }
    if thin < 1 {
        return Err(Error::domain("simulate requires thin >= 1"));
    }
    let mut rng = task_rng(seed, 0);
    let mut x = BigNat::one();
    let mut sum_len_p = 0u64;
    let mut steps = Vec::with_capacity((t_steps / thin + 1) as usize);
    for t in 1..=t_steps {
        let p = prior.sample_prime(&mut rng);
        x = x.mul_u64(p);
        sum_len_p += omega_len(&BigNat::from(p))?;
        if t % thin == 0 || t == t_steps {
            steps.push(StepRecord {
                t,
                prime: p,
                log2_x: x.log2()?,
                len_x: omega_len(&x)?,
                sum_len_p,
            });
        }
    }
    Ok(Trajectory {
        seed,
        beta: prior.beta(),
        p_max: prior.p_max(),
        steps,
    })
}

/// Per-record averaging diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingRecord {
    pub t: u64,
    pub len_x_over_t: f64,
    pub running_mean_len_p: f64,
    pub log2_x_over_t: f64,
}

/// The three ratios whose almost-sure limits the averaging law describes:
/// `l_omega(X_t)/t`, `(1/t) sum l_omega(P_i)`, and `log2(X_t)/t`.
pub fn averaging_series(traj: &Trajectory) -> Result<Vec<AveragingRecord>> {
    if traj.steps.is_empty() {
        return Err(Error::domain("averaging_series requires a nonempty trajectory"));
    }
    Ok(traj
        .steps
        .iter()
        .map(|s| {
            let t = s.t as f64;
            AveragingRecord {
                t: s.t,
                len_x_over_t: s.len_x as f64 / t,
                running_mean_len_p: s.sum_len_p as f64 / t,
                log2_x_over_t: s.log2_x / t,
            }
        })
        .collect())
}

/// Terminal growth rate `ln(X_T)/T` in nats per step.
pub fn growth_rate(traj: &Trajectory) -> Result<f64> {
    let last = traj
        .steps
        .last()
        .ok_or_else(|| Error::domain("growth_rate requires a nonempty trajectory"))?;
    Ok(last.log2_x * std::f64::consts::LN_2 / last.t as f64)
}

/// `n` i.i.d. additive gaps `G = x*(P-1)` conditional on the current state
/// `x`, as floats (the tail analyses work on real thresholds).
pub fn gap_samples<R: rand::Rng + ?Sized>(
    prior: &PrimePrior,
    x: f64,
    n: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(x > 0.0) {
        return Err(Error::domain("gap_samples requires x > 0"));
    }
    if n < 1 {
        return Err(Error::domain("gap_samples requires N >= 1"));
    }
    Ok((0..n)
        .map(|_| x * (prior.sample_prime(rng) - 1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::omega_len_u64;
    use crate::prior::build_prior;

    fn degenerate() -> PrimePrior {
        build_prior(1.0, 2).unwrap()
    }

    #[test]
    fn degenerate_three_steps() {
        let traj = simulate(&degenerate(), 3, 0, 1).unwrap();
        let last = traj.steps.last().unwrap();
        assert_eq!(last.t, 3);
        assert_eq!(last.prime, 2);
        assert!((last.log2_x - 3.0).abs() < 1e-12);
        assert_eq!(last.len_x, omega_len_u64(8).unwrap());
        assert_eq!(last.len_x, 7);
    }

    #[test]
    fn one_step_is_the_drawn_prime() {
        let prior = build_prior(2.0, 10).unwrap();
        let traj = simulate(&prior, 1, 5, 1).unwrap();
        let s = &traj.steps[0];
        assert!((s.log2_x - (s.prime as f64).log2()).abs() < 1e-12);
        assert_eq!(s.len_x, omega_len_u64(s.prime).unwrap());
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let prior = build_prior(2.0, 1000).unwrap();
        let a = simulate(&prior, 500, 42, 7).unwrap();
        let b = simulate(&prior, 500, 42, 7).unwrap();
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn exactness_against_shadow_product() {
        let prior = build_prior(2.0, 100).unwrap();
        let traj = simulate(&prior, 100, 9, 1).unwrap();
        let mut shadow = BigNat::one();
        let mut log2_sum = 0.0f64;
        for s in &traj.steps {
            shadow = shadow.mul_u64(s.prime);
            log2_sum += (s.prime as f64).log2();
            assert_eq!(s.len_x, omega_len(&shadow).unwrap(), "t={}", s.t);
            assert!((s.log2_x - log2_sum).abs() < 1e-9, "t={}", s.t);
        }
    }

    #[test]
    fn transient_strictly_increasing() {
        let prior = build_prior(1.5, 1000).unwrap();
        let traj = simulate(&prior, 300, 3, 1).unwrap();
        for w in traj.steps.windows(2) {
            assert!(w[1].log2_x > w[0].log2_x);
        }
    }

    #[test]
    fn thinning_keeps_final_step() {
        let prior = build_prior(2.0, 100).unwrap();
        let traj = simulate(&prior, 103, 1, 10).unwrap();
        let ts: Vec<u64> = traj.steps.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 103]);
    }

    #[test]
    fn averaging_on_degenerate_chain() {
        let traj = simulate(&degenerate(), 3, 0, 1).unwrap();
        let series = averaging_series(&traj).unwrap();
        let last = series.last().unwrap();
        assert!((last.len_x_over_t - 7.0 / 3.0).abs() < 1e-12);
        assert!((last.running_mean_len_p - 3.0).abs() < 1e-12);
        assert!((last.log2_x_over_t - 1.0).abs() < 1e-12);
        // t=1 rows reproduce the single-step values
        let first = &series[0];
        assert!((first.len_x_over_t - 3.0).abs() < 1e-12);
    }

    #[test]
    fn growth_rate_degenerate_is_ln2() {
        let traj = simulate(&degenerate(), 50, 0, 10).unwrap();
        assert!((growth_rate(&traj).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn growth_rate_matches_moments_oracle() {
        let prior = build_prior(2.0, 10).unwrap();
        let want = std::f64::consts::LN_2 * prior.moments().mean_log2_p;
        let traj = simulate(&prior, 10_000, 11, 100).unwrap();
        let got = growth_rate(&traj).unwrap();
        assert!((got - want).abs() / want < 0.05, "got={got} want={want}");
    }

    #[test]
    fn gap_samples_degenerate_and_tail_frequency() {
        let prior = build_prior(1.0, 2).unwrap();
        let mut rng = task_rng(0, 0);
        let gaps = gap_samples(&prior, 10.0, 100, &mut rng).unwrap();
        assert!(gaps.iter().all(|&g| g == 10.0));

        let prior = build_prior(2.0, 10).unwrap();
        let mut rng = task_rng(1, 0);
        let n = 1_000_000u64;
        let gaps = gap_samples(&prior, 10.0, n, &mut rng).unwrap();
        let hits = gaps.iter().filter(|&&g| g > 35.0).count() as f64;
        let p = 1.0 / 65.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn gap_support_matches_prior_pushforward() {
        let prior = build_prior(2.0, 10).unwrap();
        let mut rng = task_rng(2, 0);
        let gaps = gap_samples(&prior, 1.0, 20_000, &mut rng).unwrap();
        let mut seen: Vec<f64> = gaps.clone();
        seen.sort_by(f64::total_cmp);
        seen.dedup();
        assert_eq!(seen, vec![1.0, 2.0, 4.0, 6.0]);
        let freq1 = gaps.iter().filter(|&&g| g == 1.0).count() as f64 / gaps.len() as f64;
        assert!((freq1 - 32.0 / 65.0).abs() < 0.02);
    }
}
