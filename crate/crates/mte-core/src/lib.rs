//! Multiplicative Turing Ensemble toolkit.
//!
//! Building blocks for experiments on prime-multiplier chains:
//!
//! - [`omega`]: Elias omega coding over arbitrary-precision naturals, with
//!   Kraft sums and additivity diagnostics.
//! - [`prior`]: truncated Gibbs priors `pi_p ~ 2^(-beta l_omega(p))` on
//!   primes, with exact moments and tail masses.
//! - [`ptm`]: three-symbol probabilistic machines, prime filtering, and
//!   ensemble mixtures with closed-form output laws.
//! - [`engine`]: exact big-integer simulation of `X_{t+1} = X_t P_{t+1}`
//!   and its averaging diagnostics.
//! - [`tails`]: CCDFs, Hill estimation, and exact gap-tail oracles.
//! - [`empirics`]: codelength histograms of size datasets, model fitting,
//!   and KL comparison.
//!
//! All randomness flows from explicit 64-bit seeds via [`rng::task_rng`];
//! every sampler is deterministic given its seed.

pub mod bignat;
pub mod bitstring;
pub mod empirics;
pub mod engine;
pub mod error;
pub mod omega;
pub mod prior;
pub mod primes;
pub mod ptm;
pub mod rng;
pub mod tails;

pub use bignat::BigNat;
pub use bitstring::BitString;
pub use error::{Error, Result};
