//! Tail estimation and exact gap-tail oracles.
//!
//! The conditional gap `G = x(P-1)` has survival `P(G > u | X = x) =
//! tail_mass(1 + u/x)`, a step function supported on `u = x(p-1)`. Empirical
//! CCDFs are compared to that oracle pointwise and through regular-variation
//! slope fits after removing the logarithmic slow variation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::PrimePrior;

/// Empirical survival function over a sorted sample.
#[derive(Debug, Clone)]
pub struct Ccdf {
    sorted: Vec<f64>,
}

/// Build the exact empirical CCDF of a sample.
pub fn empirical_ccdf(samples: &[f64]) -> Result<Ccdf> {
    if samples.is_empty() {
        return Err(Error::domain("empirical_ccdf requires a nonempty sample"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("empirical_ccdf requires finite samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ccdf { sorted })
}

impl Ccdf {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples strictly greater than `v`.
    pub fn survival(&self, v: f64) -> f64 {
        let idx = self.sorted.partition_point(|&s| s <= v);
        (self.sorted.len() - idx) as f64 / self.sorted.len() as f64
    }

    /// Distinct sample values, ascending.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vals = self.sorted.clone();
        vals.dedup();
        vals
    }
}

/// Least-squares line through `(xs, ys)`; returns `(slope, intercept)`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate window: no x spread".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Least-squares slope of `log S(u)` against `log u` over the window
/// `[u_lo, u_hi]`, evaluated at distinct sample values with positive
/// survival.
pub fn loglog_slope(ccdf: &Ccdf, u_lo: f64, u_hi: f64) -> Result<f64> {
    if !(u_lo > 0.0 && u_hi > u_lo) {
        return Err(Error::Fit("window must satisfy 0 < u_lo < u_hi".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut levels = Vec::new();
    for v in ccdf.distinct_values() {
        if v < u_lo || v > u_hi {
            continue;
        }
        let s = ccdf.survival(v);
        if s <= 0.0 {
            continue;
        }
        xs.push(v.ln());
        ys.push(s.ln());
        levels.push(s);
    }
    levels.dedup();
    if levels.len() < 10 {
        return Err(Error::Fit(format!(
            "window holds {} distinct survival levels, need >= 10",
            levels.len()
        )));
    }
    least_squares_line(&xs, &ys).map(|(slope, _)| slope)
}

/// Hill tail-index estimate from the top `k` order statistics. Returns the
/// index `1/gamma_hat`, with `+inf` as the sentinel for constant tails.
pub fn hill_estimator(samples: &[f64], k: usize) -> Result<f64> {
    if k < 1 || k >= samples.len() {
        return Err(Error::domain("hill_estimator requires 1 <= k < n"));
    }
    if samples.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain("hill_estimator requires positive samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let base = sorted[n - 1 - k].ln();
    let gamma: f64 = sorted[n - k..].iter().map(|v| v.ln() - base).sum::<f64>() / k as f64;
    if gamma == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0 / gamma)
    }
}

/// Exact conditional gap survival `P(G > u | X = x)`.
pub fn conditional_gap_tail_exact(prior: &PrimePrior, x: f64, u: f64) -> f64 {
    prior.tail_mass(1.0 + u / x)
}

/// Finite mixing measure over states `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixingRepr", into = "MixingRepr")]
pub struct MixingMeasure {
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct MixingRepr {
    atoms: Vec<(f64, f64)>,
}

impl From<MixingMeasure> for MixingRepr {
    fn from(m: MixingMeasure) -> Self {
        MixingRepr { atoms: m.atoms }
    }
}

impl TryFrom<MixingRepr> for MixingMeasure {
    type Error = Error;
    fn try_from(r: MixingRepr) -> Result<Self> {
        MixingMeasure::new(r.atoms)
    }
}

impl MixingMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("mixing measure needs at least one atom"));
        }
        if atoms.iter().any(|&(x, w)| !(x > 0.0) || !(w > 0.0)) {
            return Err(Error::domain(
                "mixing measure atoms and weights must be strictly positive",
            ));
        }
        let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "mixing weights must sum to 1, got {total}"
            )));
        }
        Ok(MixingMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Draw an atom's `x` value.
    pub fn sample_x<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(x, w) in &self.atoms {
            acc += w;
            if u < acc {
                return x;
            }
        }
        self.atoms.last().unwrap().0
    }
}

/// Exact unconditional gap survival under the mixing measure.
pub fn mixture_gap_tail(prior: &PrimePrior, nu: &MixingMeasure, u: f64) -> f64 {
    nu.atoms
        .iter()
        .map(|&(x, w)| w * conditional_gap_tail_exact(prior, x, u))
        .sum()
}

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz confidence band.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Count support points where the empirical survival leaves the band around
/// the exact one.
///
/// Both laws are step functions on `support`, and survival functions are
/// right-continuous with flats between atoms, so the sup deviation over all
/// of R is attained among the right-hand values at the support points.
pub fn dkw_violations(
    ccdf: &Ccdf,
    support: &[f64],
    exact_survival: impl Fn(f64) -> f64,
    eps: f64,
) -> usize {
    support
        .iter()
        .filter(|&&u| (ccdf.survival(u) - exact_survival(u)).abs() > eps)
        .count()
}

/// Regular-variation slope of an exact survival curve after dividing out the
/// slowly varying factor `(log y)^(-beta)`: fits `ln(S(y) (ln y)^beta)`
/// against `ln y`.
pub fn slow_variation_adjusted_slope(ys: &[f64], survival: &[f64], beta: f64) -> Result<f64> {
    if ys.len() != survival.len() {
        return Err(Error::Fit("ys and survival lengths differ".into()));
    }
    let mut xs = Vec::new();
    let mut adj = Vec::new();
    for (&y, &s) in ys.iter().zip(survival) {
        if !(y > 1.0) || !(s > 0.0) {
            continue;
        }
        xs.push(y.ln());
        adj.push((s * y.ln().powf(beta)).ln());
    }
    if xs.len() < 10 {
        return Err(Error::Fit(format!(
            "only {} usable points in the slope window, need >= 10",
            xs.len()
        )));
    }
    least_squares_line(&xs, &adj).map(|(slope, _)| slope)
}

/// Default fit window: one decade of `u` ending where the exact survival
/// first drops below `100/n` (keeps clear of the truncation cliff).
pub fn default_fit_window(
    exact_survival: impl Fn(f64) -> f64,
    u_max: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if !(u_max > 1.0) {
        return Err(Error::Fit("u_max must exceed 1".into()));
    }
    let floor = 100.0 / n as f64;
    let mut u_hi = u_max;
    // walk a fine log grid downward until survival clears the floor
    let grid = 2000;
    for i in 0..=grid {
        let u = (u_max.ln() * (grid - i) as f64 / grid as f64).exp();
        if exact_survival(u) >= floor {
            u_hi = u;
            break;
        }
    }
    let u_lo = u_hi / 10.0;
    if u_lo <= 0.0 || u_lo >= u_hi {
        return Err(Error::Fit("could not locate a fit window".into()));
    }
    Ok((u_lo, u_hi))
}
