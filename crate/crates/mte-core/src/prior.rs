//! Truncated Gibbs priors on primes.
//!
//! The multiplier law puts mass proportional to `2^(-beta * l_omega(p))` on
//! each prime `p <= p_max`, renormalized over the truncated support. Weights
//! are computed relative to the smallest codelength in the support so the
//! exponentials stay well inside f64 range even for large `beta`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::omega::omega_len_u64;
use crate::primes::sieve_primes;
use crate::rng::KahanSum;

/// Exact first moments of a prior over its truncated support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    /// E[log2 P] in bits.
    pub mean_log2_p: f64,
    /// E[l_omega(P)] in bits.
    pub mean_len_p: f64,
    /// E[ln P] in nats.
    pub mean_ln_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PriorRepr", into = "PriorRepr")]
pub struct PrimePrior {
    beta: f64,
    p_max: u64,
    primes: Vec<u64>,
    masses: Vec<f64>,
    /// log2 of the pre-normalization weight sum `sum_p 2^(-beta l_omega(p))`.
    log_norm: f64,
    cum: Vec<f64>,
    suffix: Vec<f64>,
}

/// On-disk shape: `{beta, p_max, primes, masses}`.
#[derive(Serialize, Deserialize)]
struct PriorRepr {
    beta: f64,
    p_max: u64,
    primes: Vec<u64>,
    masses: Vec<f64>,
}

impl From<PrimePrior> for PriorRepr {
    fn from(p: PrimePrior) -> Self {
        PriorRepr {
            beta: p.beta,
            p_max: p.p_max,
            primes: p.primes,
            masses: p.masses,
        }
    }
}

impl TryFrom<PriorRepr> for PrimePrior {
    type Error = Error;

    fn try_from(r: PriorRepr) -> Result<Self> {
        if r.primes.len() != r.masses.len() || r.primes.is_empty() {
            return Err(Error::domain("prior: primes/masses length mismatch"));
        }
        let lens: Vec<u64> = r
            .primes
            .iter()
            .map(|&p| omega_len_u64(p).expect("prime >= 2"))
            .collect();
        let log_norm = log_norm_from_lens(r.beta, &lens);
        let (cum, suffix) = accumulate(&r.masses);
        Ok(PrimePrior {
            beta: r.beta,
            p_max: r.p_max,
            primes: r.primes,
            masses: r.masses,
            log_norm,
            cum,
            suffix,
        })
    }
}

fn log_norm_from_lens(beta: f64, lens: &[u64]) -> f64 {
    let lmin = *lens.iter().min().expect("nonempty") as f64;
    let mut z = KahanSum::new();
    for &l in lens {
        z.add((-beta * (l as f64 - lmin)).exp2());
    }
    z.value().log2() - beta * lmin
}

fn accumulate(masses: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cum = Vec::with_capacity(masses.len());
    let mut acc = KahanSum::new();
    for &m in masses {
        acc.add(m);
        cum.push(acc.value());
    }
    let mut suffix = vec![0.0; masses.len() + 1];
    let mut tail = KahanSum::new();
    for i in (0..masses.len()).rev() {
        tail.add(masses[i]);
        suffix[i] = tail.value();
    }
    (cum, suffix)
}

/// Build the truncated Gibbs prior with exponent `beta` over primes `<= p_max`.
pub fn build_prior(beta: f64, p_max: u64) -> Result<PrimePrior> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain("prior requires beta > 0"));
    }
    let primes = sieve_primes(p_max)?;
    let lens: Vec<u64> = primes
        .iter()
        .map(|&p| omega_len_u64(p).expect("prime >= 2"))
        .collect();
    let lmin = *lens.iter().min().expect("nonempty") as f64;
    let mut z = KahanSum::new();
    let weights: Vec<f64> = lens
        .iter()
        .map(|&l| {
            let w = (-beta * (l as f64 - lmin)).exp2();
            z.add(w);
            w
        })
        .collect();
    let z = z.value();
    let masses: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let (cum, suffix) = accumulate(&masses);
    Ok(PrimePrior {
        beta,
        p_max,
        primes,
        masses,
        log_norm: z.log2() - beta * lmin,
        cum,
        suffix,
    })
}

impl PrimePrior {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p_max(&self) -> u64 {
        self.p_max
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn support_size(&self) -> usize {
        self.primes.len()
    }

    /// Mass at `p`: the prior probability if `p` is a supported prime, else 0.
    pub fn mass(&self, p: u64) -> f64 {
        match self.primes.binary_search(&p) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }

    /// One draw from the prior via inverse CDF over the precomputed
    /// cumulative masses.
    pub fn sample_prime<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cum.partition_point(|&c| c <= u);
        self.primes[idx.min(self.primes.len() - 1)]
    }

    /// Exact `sum_{p > y} pi_p` over the truncated support.
    pub fn tail_mass(&self, y: f64) -> f64 {
        let idx = self.primes.partition_point(|&p| (p as f64) <= y);
        self.suffix[idx]
    }

    /// Exact expectations over the truncated support.
    pub fn moments(&self) -> Moments {
        let mut log2 = KahanSum::new();
        let mut len = KahanSum::new();
        let mut ln = KahanSum::new();
        for (&p, &m) in self.primes.iter().zip(&self.masses) {
            let lp = (p as f64).ln();
            log2.add(m * lp / std::f64::consts::LN_2);
            len.add(m * omega_len_u64(p).expect("prime >= 2") as f64);
            ln.add(m * lp);
        }
        Moments {
            mean_log2_p: log2.value(),
            mean_len_p: len.value(),
            mean_ln_p: ln.value(),
        }
    }
}

/// `E[ln P]` under the prior truncated (and renormalized) at each cutoff.
///
/// At `beta = 1` the sequence keeps growing with the cutoff; for `beta > 1`
/// it stabilizes. Useful as a numeric probe of the integrability boundary.
pub fn divergence_diagnostic(beta: f64, cutoffs: &[u64]) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::domain("divergence diagnostic requires beta > 0"));
    }
    if cutoffs.is_empty() {
        return Err(Error::domain("divergence diagnostic requires cutoffs"));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("cutoffs must be strictly ascending"));
    }
    let primes = sieve_primes(*cutoffs.last().unwrap())?;
    // lmin over the full support so every cutoff shares the weight scale
    let lmin = omega_len_u64(primes[0]).unwrap() as f64;
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut z = KahanSum::new();
    let mut num = KahanSum::new();
    let mut i = 0usize;
    for &cutoff in cutoffs {
        while i < primes.len() && primes[i] <= cutoff {
            let p = primes[i];
            let w = (-beta * (omega_len_u64(p).unwrap() as f64 - lmin)).exp2();
            z.add(w);
            num.add(w * (p as f64).ln());
            i += 1;
        }
        if z.value() == 0.0 {
            return Err(Error::domain(format!("no primes at or below {cutoff}")));
        }
        out.push(num.value() / z.value());
    }
    Ok(out)
}

/// `sum_{p <= p_max} 2^(-l_omega(p))`; strictly below the full Kraft sum.
pub fn prime_kraft_sum(p_max: u64) -> Result<f64> {
    let primes = sieve_primes(p_max)?;
    let mut s = KahanSum::new();
    for p in primes {
        s.add((-(omega_len_u64(p).unwrap() as f64)).exp2());
    }
    Ok(s.value())
}

/// Estimated mass lost to truncation: `1 - Z(p_max) / Z(probe * p_max)`.
pub fn truncation_bias(beta: f64, p_max: u64, probe_factor: u64) -> Result<f64> {
    if probe_factor < 2 {
        return Err(Error::domain("probe factor must be >= 2"));
    }
    let z_small = build_prior(beta, p_max)?.log_norm;
    let z_big = build_prior(beta, p_max.saturating_mul(probe_factor))?.log_norm;
    Ok(1.0 - (z_small - z_big).exp2())
}
