//! Canonical element encodings.
//!
//! Grid points use bijective base-2 (the unique minimal-length scheme whose
//! (length, lex) order coincides with numeric order), box and product
//! coordinates use fixed widths, rationals use a prefix-free gamma scheme so
//! concatenations decode unambiguously.

use crate::bits::{BitReader, Bits};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Bijective base-2: "" = 0, "0" = 1, "1" = 2, "00" = 3, ...
/// Encoding of v is the binary expansion of v + 1 with the leading 1 dropped.
pub fn encode_bijective(v: u64, out: &mut Bits) {
    let m = v + 1;
    let bits = 64 - m.leading_zeros() as usize;
    for i in (0..bits.saturating_sub(1)).rev() {
        out.push(m >> i & 1 == 1);
    }
}

pub fn decode_bijective(r: &mut BitReader<'_>, len: usize) -> Option<u64> {
    let mut m: u64 = 1;
    for _ in 0..len {
        m = m.checked_mul(2)? | r.read()? as u64;
    }
    Some(m - 1)
}

pub fn bijective_len(v: u64) -> usize {
    (64 - (v + 1).leading_zeros() as usize) - 1
}

/// Width needed for a fixed-width coordinate with values 0..size.
pub fn fixed_width(size: u64) -> usize {
    if size <= 1 {
        0
    } else {
        64 - (size - 1).leading_zeros() as usize
    }
}

/// Elias gamma of n + 1: prefix-free code for naturals.
pub fn encode_gamma(n: &BigUint, out: &mut Bits) {
    let m = n + 1u32;
    let nbits = m.bits() as usize;
    for _ in 0..nbits - 1 {
        out.push(false);
    }
    for i in (0..nbits).rev() {
        out.push(m.bit(i as u64));
    }
}

pub fn decode_gamma(r: &mut BitReader<'_>) -> Option<BigUint> {
    let mut zeros = 0usize;
    loop {
        match r.read()? {
            false => zeros += 1,
            true => break,
        }
        if zeros > 1 << 20 {
            return None;
        }
    }
    let mut m = BigUint::one();
    for _ in 0..zeros {
        m = m << 1u8 | BigUint::from(r.read()? as u8);
    }
    Some(m - 1u32)
}

pub fn gamma_len(n: &BigUint) -> usize {
    let m = n + 1u32;
    2 * m.bits() as usize - 1
}

/// Sign bit, then gamma(|numerator|), then gamma(denominator - 1).
/// Inputs are reduced by BigRational's invariant, so the scheme is canonical.
pub fn encode_rational(q: &BigRational, out: &mut Bits) {
    out.push(q.is_negative());
    encode_gamma(q.numer().magnitude(), out);
    encode_gamma(&(q.denom().magnitude() - 1u32), out);
}

pub fn decode_rational(r: &mut BitReader<'_>) -> Option<BigRational> {
    let neg = r.read()?;
    let num = decode_gamma(r)?;
    let den = decode_gamma(r)? + 1u32;
    if neg && num.is_zero() {
        return None; // -0 is not canonical
    }
    let sign = if neg { Sign::Minus } else { Sign::Plus };
    Some(BigRational::new(
        BigInt::from_biguint(sign, num),
        BigInt::from(den),
    ))
}

pub fn rational_len(q: &BigRational) -> usize {
    1 + gamma_len(q.numer().magnitude()) + gamma_len(&(q.denom().magnitude() - 1u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    #[test]
    fn bijective_order_matches_numeric() {
        let enc = |v: u64| {
            let mut b = Bits::new();
            encode_bijective(v, &mut b);
            b
        };
        let mut prev = enc(0);
        for v in 1..200 {
            let cur = enc(v);
            assert!(prev < cur, "order broke at {v}");
            assert_eq!(cur.len(), bijective_len(v));
            prev = cur;
        }
    }

    #[test]
    fn bijective_roundtrip() {
        for v in [0u64, 1, 2, 3, 7, 8, 100, 65535, u32::MAX as u64] {
            let mut b = Bits::new();
            encode_bijective(v, &mut b);
            let mut r = BitReader::new(&b);
            assert_eq!(decode_bijective(&mut r, b.len()), Some(v));
        }
    }

    #[test]
    fn gamma_roundtrip_prefix_free() {
        let mut b = Bits::new();
        let values = [0u64, 1, 2, 5, 127, 128, 1 << 20];
        for &v in &values {
            encode_gamma(&BigUint::from(v), &mut b);
        }
        let mut r = BitReader::new(&b);
        for &v in &values {
            assert_eq!(decode_gamma(&mut r), Some(BigUint::from(v)));
        }
        assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn rational_roundtrip() {
        let cases = [(-3i64, 7u64), (0, 1), (5, 1), (22, 7), (-1, 2)];
        let mut b = Bits::new();
        for &(n, d) in &cases {
            let q = BigRational::new(BigInt::from(n), BigInt::from(d));
            encode_rational(&q, &mut b);
        }
        let mut r = BitReader::new(&b);
        for &(n, d) in &cases {
            let q = BigRational::new(BigInt::from(n), BigInt::from(d));
            assert_eq!(decode_rational(&mut r), Some(q.clone()));
            assert_eq!(rational_len(&q), {
                let mut tmp = Bits::new();
                encode_rational(&q, &mut tmp);
                tmp.len()
            });
        }
        let half = BigRational::from_f64(0.5).unwrap();
        assert_eq!(rational_len(&half), 1 + 3 + 3);
    }
}
