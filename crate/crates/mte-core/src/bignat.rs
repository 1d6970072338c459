//! Arbitrary-precision natural numbers.
//!
//! `BigNat` is a thin wrapper over [`BigUint`] carrying the bit-length
//! convention used throughout this crate: `bit_len(0) = 0` and
//! `bit_len(n) = floor(log2 n) + 1` for `n >= 1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct BigNat(BigUint);

impl BigNat {
    pub fn zero() -> Self {
        BigNat(BigUint::zero())
    }

    pub fn one() -> Self {
        BigNat(BigUint::one())
    }

    pub fn bit_len(&self) -> u64 {
        self.0.bits()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn bit(&self, i: u64) -> bool {
        self.0.bit(i)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }

    pub fn mul(&self, other: &BigNat) -> BigNat {
        BigNat(&self.0 * &other.0)
    }

    pub fn mul_u64(&self, other: u64) -> BigNat {
        BigNat(&self.0 * other)
    }

    pub fn shl(&self, bits: u64) -> BigNat {
        BigNat(&self.0 << bits)
    }

    /// log2 of the value, accurate to f64 precision for any size.
    pub fn log2(&self) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::domain("log2 of zero"));
        }
        let b = self.bit_len();
        if b <= 53 {
            Ok((self.to_u64().unwrap() as f64).log2())
        } else {
            // keep the top 53 bits and account for the shift
            let shifted = (&self.0 >> (b - 53)).to_u64().unwrap();
            Ok((shifted as f64).log2() + (b - 53) as f64)
        }
    }

    /// Uniform random value with exactly `bits` bits (top bit set).
    pub fn random_with_bits<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> BigNat {
        assert!(bits >= 1);
        let words = bits.div_ceil(32) as usize;
        let mut digits = vec![0u32; words];
        for d in digits.iter_mut() {
            *d = rng.random();
        }
        let mut v = BigUint::new(digits);
        let excess = (words as u64) * 32 - bits;
        v >>= excess;
        v.set_bit(bits - 1, true);
        BigNat(v)
    }
}

impl From<u64> for BigNat {
    fn from(v: u64) -> Self {
        BigNat(BigUint::from(v))
    }
}

impl From<u128> for BigNat {
    fn from(v: u128) -> Self {
        BigNat(BigUint::from(v))
    }
}

impl From<BigUint> for BigNat {
    fn from(v: BigUint) -> Self {
        BigNat(v)
    }
}

impl FromStr for BigNat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<BigUint>()
            .map(BigNat)
            .map_err(|e| Error::domain(format!("invalid decimal integer {s:?}: {e}")))
    }
}

impl fmt::Display for BigNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
