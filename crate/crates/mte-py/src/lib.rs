//! Python bindings: the toolkit's main types and operations as an extension
//! module. Arbitrary-size integers cross the boundary as Python ints.

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mte_core::bignat::BigNat;
use mte_core::bitstring::BitString;
use mte_core::error::Error;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyfunction]
fn omega_encode(n: BigUint) -> PyResult<String> {
    Ok(mte_core::omega::omega_encode(&BigNat::from(n))
        .map_err(err)?
        .to_string())
}

/// Decode one codeword; returns `(value, bits_consumed)`.
#[pyfunction]
fn omega_decode(bits: &str) -> PyResult<(BigUint, usize)> {
    let bits: BitString = bits.parse().map_err(err)?;
    let (n, used) = mte_core::omega::omega_decode(&bits).map_err(err)?;
    Ok((n.into_biguint(), used))
}

#[pyfunction]
fn omega_len(n: BigUint) -> PyResult<u64> {
    mte_core::omega::omega_len(&BigNat::from(n)).map_err(err)
}

#[pyfunction]
fn kraft_partial_sum(n: u64) -> PyResult<f64> {
    mte_core::omega::kraft_partial_sum(n).map_err(err)
}

#[pyfunction]
fn near_additivity_defect(a: BigUint, b: BigUint) -> PyResult<i64> {
    mte_core::omega::near_additivity_defect(&BigNat::from(a), &BigNat::from(b)).map_err(err)
}

#[pyfunction]
fn compressing_defect(n: BigUint, m: u64) -> PyResult<i64> {
    mte_core::omega::compressing_defect(&BigNat::from(n), m).map_err(err)
}

#[pyfunction]
fn is_prime(n: BigUint) -> bool {
    mte_core::primes::is_prime(&BigNat::from(n))
}

/// Truncated Gibbs prior `pi_p ~ 2^(-beta l_omega(p))` on primes <= p_max.
#[pyclass]
struct PrimePrior {
    inner: mte_core::prior::PrimePrior,
}

#[pymethods]
impl PrimePrior {
    #[new]
    fn new(beta: f64, p_max: u64) -> PyResult<Self> {
        Ok(PrimePrior {
            inner: mte_core::prior::build_prior(beta, p_max).map_err(err)?,
        })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn p_max(&self) -> u64 {
        self.inner.p_max()
    }

    fn primes(&self) -> Vec<u64> {
        self.inner.primes().to_vec()
    }

    fn masses(&self) -> Vec<f64> {
        self.inner.masses().to_vec()
    }

    fn mass(&self, p: u64) -> f64 {
        self.inner.mass(p)
    }

    fn tail_mass(&self, y: f64) -> f64 {
        self.inner.tail_mass(y)
    }

    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = self.inner.moments();
        let d = PyDict::new(py);
        d.set_item("mean_log2_p", m.mean_log2_p)?;
        d.set_item("mean_len_p", m.mean_len_p)?;
        d.set_item("mean_ln_p", m.mean_ln_p)?;
        Ok(d)
    }

    /// `n` prime draws from the prior under the given seed.
    fn sample(&self, n: u64, seed: u64) -> Vec<u64> {
        let mut rng = mte_core::rng::task_rng(seed, 0);
        (0..n).map(|_| self.inner.sample_prime(&mut rng)).collect()
    }

    /// Conditional gap survival `P(G > u | X = x)`.
    fn gap_tail(&self, x: f64, u: f64) -> f64 {
        mte_core::tails::conditional_gap_tail_exact(&self.inner, x, u)
    }
}

/// Simulate the chain; returns rows `(t, prime, log2_x, len_x)`.
#[pyfunction]
#[pyo3(signature = (prior, steps, seed=0, thin=100))]
fn simulate(
    prior: &PrimePrior,
    steps: u64,
    seed: u64,
    thin: u64,
) -> PyResult<Vec<(u64, u64, f64, u64)>> {
    let traj = mte_core::engine::simulate(&prior.inner, steps, seed, thin).map_err(err)?;
    Ok(traj
        .steps
        .iter()
        .map(|s| (s.t, s.prime, s.log2_x, s.len_x))
        .collect())
}

/// `n` additive gap samples `x * (P - 1)` under the given seed.
#[pyfunction]
#[pyo3(signature = (prior, x, n, seed=0))]
fn gap_samples(prior: &PrimePrior, x: f64, n: u64, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = mte_core::rng::task_rng(seed, 0);
    mte_core::engine::gap_samples(&prior.inner, x, n, &mut rng).map_err(err)
}

/// Exact prime-conditional output law of a three-symbol machine, as
/// `(primes, masses)`.
#[pyfunction]
fn ptm_law(p0: f64, p1: f64, ps: f64, p_max: u64) -> PyResult<(Vec<u64>, Vec<f64>)> {
    let params = mte_core::ptm::PtmParams::new(p0, p1, ps).map_err(err)?;
    let law = mte_core::ptm::prime_conditional_exact(&params, p_max).map_err(err)?;
    Ok((law.primes, law.masses))
}

/// Rejection-sample `n` primes from a three-symbol machine.
#[pyfunction]
#[pyo3(signature = (p0, p1, ps, n, seed=0))]
fn ptm_sample(p0: f64, p1: f64, ps: f64, n: u64, seed: u64) -> PyResult<Vec<BigUint>> {
    let params = mte_core::ptm::PtmParams::new(p0, p1, ps).map_err(err)?;
    let mut rng = mte_core::rng::task_rng(seed, 0);
    (0..n)
        .map(|_| {
            mte_core::ptm::sample_prime_filtered(
                &params,
                &mut rng,
                mte_core::ptm::DEFAULT_MAX_ATTEMPTS,
            )
            .map(BigNat::into_biguint)
            .map_err(err)
        })
        .collect()
}

#[pyfunction]
fn hill_estimator(samples: Vec<f64>, k: usize) -> PyResult<f64> {
    mte_core::tails::hill_estimator(&samples, k).map_err(err)
}

#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    mte_core::empirics::kl_divergence(&p, &q).map_err(err)
}

/// Fit `exp(-a l - c)` to the codelength histogram of `sizes`; returns
/// `(a, c, residual)` on the natural-log scale.
#[pyfunction]
fn fit_scaled(sizes: Vec<u64>) -> PyResult<(f64, f64, f64)> {
    let hist = mte_core::empirics::codelength_histogram(&sizes).map_err(err)?;
    let fit = mte_core::empirics::fit_scaled(&hist).map_err(err)?;
    Ok((fit.a, fit.c, fit.residual))
}

/// Alignment diagnostics of a finite-support integer law given as
/// `{n: probability}`; returns `{alignment, entropy, mean_len}` in bits.
#[pyfunction]
fn gibbs_alignment<'py>(py: Python<'py>, mu: Vec<(BigUint, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let mu: Vec<(BigNat, f64)> = mu.into_iter().map(|(n, w)| (BigNat::from(n), w)).collect();
    let a = mte_core::empirics::gibbs_alignment(&mu).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("alignment", a.alignment)?;
    d.set_item("entropy", a.entropy)?;
    d.set_item("mean_len", a.mean_len)?;
    Ok(d)
}

#[pymodule]
fn mte_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(omega_encode, m)?)?;
    m.add_function(wrap_pyfunction!(omega_decode, m)?)?;
    m.add_function(wrap_pyfunction!(omega_len, m)?)?;
    m.add_function(wrap_pyfunction!(kraft_partial_sum, m)?)?;
    m.add_function(wrap_pyfunction!(near_additivity_defect, m)?)?;
    m.add_function(wrap_pyfunction!(compressing_defect, m)?)?;
    m.add_function(wrap_pyfunction!(is_prime, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(gap_samples, m)?)?;
    m.add_function(wrap_pyfunction!(ptm_law, m)?)?;
    m.add_function(wrap_pyfunction!(ptm_sample, m)?)?;
    m.add_function(wrap_pyfunction!(hill_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaled, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_alignment, m)?)?;
    m.add_class::<PrimePrior>()?;
    Ok(())
}
