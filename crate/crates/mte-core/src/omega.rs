//! Elias ω code: exact encoding, decoding and codelength.
//!
//! The ω code writes a positive integer as a chain of length groups. Encoding
//! prepends the binary expansion of the current value, then recurses on its
//! bit length minus one, stopping at 1; a trailing `0` terminates the
//! codeword. The codelength therefore depends on `n` only through the chain
//! of bit lengths
//!
//! ```text
//! n_0 = n,   n_{j+1} = floor(log2 n_j),   stop at 1,
//! ```
//!
//! which lets `omega_len` handle values of any size without materializing a
//! codeword: a chain step reduces a b-bit number to the (at most 7-bit)
//! number b-1, so only the first step ever touches the big integer.

use crate::bignat::BigNat;
use crate::bitstring::BitString;
use crate::error::{Error, Result};

/// Codelength of the ω codeword for `n >= 1`, without building the codeword.
pub fn omega_len(n: &BigNat) -> Result<u64> {
    if n.is_zero() {
        return Err(Error::domain("omega code undefined at 0"));
    }
    if n.is_one() {
        return Ok(1);
    }
    let b = n.bit_len();
    Ok(b + omega_len_u64(b - 1).expect("b >= 2"))
}

/// `omega_len` specialized to machine integers.
pub fn omega_len_u64(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("omega code undefined at 0"));
    }
    let mut total = 1u64;
    let mut cur = n;
    while cur > 1 {
        let b = 64 - u64::from(cur.leading_zeros());
        total += b;
        cur = b - 1;
    }
    Ok(total)
}

/// Canonical Elias ω codeword for `n >= 1`.
///
/// Groups are emitted most-significant-bit first, outermost recursion last,
/// followed by the stop bit `0`.
pub fn omega_encode(n: &BigNat) -> Result<BitString> {
    if n.is_zero() {
        return Err(Error::domain("omega code undefined at 0"));
    }
    let mut groups: Vec<Vec<bool>> = Vec::new();
    let mut cur = n.clone();
    while !cur.is_one() {
        let b = cur.bit_len();
        let mut group = Vec::with_capacity(b as usize);
        for i in (0..b).rev() {
            group.push(cur.bit(i));
        }
        groups.push(group);
        cur = BigNat::from(b - 1);
    }
    let mut bits = Vec::new();
    for group in groups.into_iter().rev() {
        bits.extend(group);
    }
    bits.push(false); // stop bit
    Ok(BitString::from_bits(bits))
}

/// Decode one ω codeword from the front of `bits`.
///
/// Returns the decoded value and the number of bits consumed; trailing bits
/// are untouched.
pub fn omega_decode(bits: &BitString) -> Result<(BigNat, usize)> {
    let mut n = BigNat::one();
    let mut pos = 0usize;
    loop {
        let Some(flag) = bits.get(pos) else {
            return Err(Error::Decode {
                offset: pos,
                msg: "truncated codeword: ran out of bits".into(),
            });
        };
        if !flag {
            return Ok((n, pos + 1));
        }
        // a `1` starts a group of n+1 bits (including the `1` itself)
        let group_len = n
            .to_u64()
            .and_then(|v| v.checked_add(1))
            .and_then(|v| usize::try_from(v).ok())
            .ok_or_else(|| Error::Decode {
                offset: pos,
                msg: "group length exceeds addressable input".into(),
            })?;
        if pos + group_len > bits.len() {
            return Err(Error::Decode {
                offset: pos,
                msg: format!(
                    "truncated codeword: group of {group_len} bits exceeds remaining input"
                ),
            });
        }
        let mut v = num_bigint::BigUint::default();
        for i in 0..group_len {
            v <<= 1u8;
            if bits.get(pos + i).unwrap() {
                v += 1u8;
            }
        }
        n = BigNat::from(v);
        pos += group_len;
    }
}

/// Partial Kraft sum `sum_{n=1..N} 2^(-l_omega(n))`.
///
/// Codelength is constant on each bit-length class, so the sum collapses to
/// one term per class.
pub fn kraft_partial_sum(n_max: u64) -> Result<f64> {
    if n_max < 1 {
        return Err(Error::domain("kraft partial sum requires N >= 1"));
    }
    let mut total = 0.5f64; // n = 1, codeword "0"
    let top_bits = 64 - u64::from(n_max.leading_zeros());
    for b in 2..=top_bits {
        let lo = 1u64 << (b - 1);
        let hi = (lo - 1 + lo).min(n_max); // 2^b - 1, capped at N
        if hi < lo {
            break;
        }
        let len = b + omega_len_u64(b - 1).expect("b >= 2");
        total += (hi - lo + 1) as f64 * (-(len as f64)).exp2();
    }
    Ok(total)
}

/// `l_omega(ab) - l_omega(a) - l_omega(b)` for `a, b >= 2`.
pub fn near_additivity_defect(a: &BigNat, b: &BigNat) -> Result<i64> {
    if a.bit_len() < 2 || b.bit_len() < 2 {
        return Err(Error::domain("near-additivity defect requires a, b >= 2"));
    }
    let prod = a.mul(b);
    Ok(omega_len(&prod)? as i64 - omega_len(a)? as i64 - omega_len(b)? as i64)
}

/// Fast path over machine integers; the product must fit in u128.
pub fn near_additivity_defect_u64(a: u64, b: u64) -> Result<i64> {
    if a < 2 || b < 2 {
        return Err(Error::domain("near-additivity defect requires a, b >= 2"));
    }
    let prod = u128::from(a) * u128::from(b);
    let pb = 128 - u64::from(prod.leading_zeros());
    let prod_len = pb + omega_len_u64(pb - 1).expect("pb >= 2");
    Ok(prod_len as i64 - omega_len_u64(a)? as i64 - omega_len_u64(b)? as i64)
}

/// `l_omega(2^m n) - (l_omega(n) + m + l_omega(m))` for `n >= 1`, `m >= 1`.
///
/// Uses bit lengths only: `bit_len(2^m n) = bit_len(n) + m`.
pub fn compressing_defect(n: &BigNat, m: u64) -> Result<i64> {
    if n.is_zero() {
        return Err(Error::domain("compressing defect requires n >= 1"));
    }
    if m == 0 {
        return Err(Error::domain("compressing defect requires m >= 1"));
    }
    let b = n.bit_len() + m; // bit length of 2^m * n, always >= 2 here
    let scaled_len = b + omega_len_u64(b - 1).expect("b >= 2");
    Ok(scaled_len as i64 - (omega_len(n)? as i64 + m as i64 + omega_len_u64(m)? as i64))
}

/// First-order codelength approximation `log2 n + log2 log2 n`, for `n >= 2`.
pub fn omega_len_approx(n: &BigNat) -> Result<f64> {
    if n.bit_len() < 2 {
        return Err(Error::domain("approximation requires n >= 2"));
    }
    let l = n.log2()?;
    Ok(l + l.log2())
}
