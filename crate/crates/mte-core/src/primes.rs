//! Prime generation and primality testing.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bignat::BigNat;
use crate::error::{Error, Result};

/// All primes in `[2, p_max]`, ascending. Plain sieve of Eratosthenes; a
/// 10^7 cutoff takes well under a second.
pub fn sieve_primes(p_max: u64) -> Result<Vec<u64>> {
    if p_max < 2 {
        return Err(Error::domain("sieve requires p_max >= 2"));
    }
    let n = usize::try_from(p_max).map_err(|_| Error::domain("p_max too large to sieve"))?;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    for (p, &c) in composite.iter().enumerate().skip(2) {
        if !c {
            primes.push(p as u64);
        }
    }
    Ok(primes)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 (the 12 smallest prime bases cover
/// the full 64-bit range).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const MR_BASES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Primality for arbitrary-size naturals. Exact below 2^64, Miller-Rabin
/// with 25 fixed bases above (error probability below 4^-25).
pub fn is_prime(n: &BigNat) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    let n = n.as_biguint();
    for p in MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u8), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    #[test]
    fn sieve_examples() {
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(
            sieve_primes(30).unwrap(),
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        );
        assert!(sieve_primes(1).is_err());
    }

    #[test]
    fn sieve_count_at_one_million() {
        assert_eq!(sieve_primes(1_000_000).unwrap().len(), 78_498);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = sieve_primes(10_000).unwrap();
        let mut idx = 0;
        for n in 0u64..=10_000 {
            let expect = idx < primes.len() && primes[idx] == n;
            if expect {
                idx += 1;
            }
            assert_eq!(is_prime_u64(n), expect, "n={n}");
        }
    }

    #[test]
    fn big_primality() {
        // 2^89 - 1 is a Mersenne prime; 2^67 - 1 is famously composite
        let m89 = BigNat::from_str("618970019642690137449562111").unwrap();
        let m67 = BigNat::from_str("147573952589676412927").unwrap();
        assert!(is_prime(&m89));
        assert!(!is_prime(&m67));
        assert!(!is_prime(&BigNat::zero()));
        assert!(!is_prime(&BigNat::one()));
    }
}
