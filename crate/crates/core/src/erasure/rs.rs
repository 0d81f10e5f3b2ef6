//! Reed-Solomon erasure coding over GF(2^16).
//!
//! Messages are framed with a 64-bit big-endian bit-length prefix and
//! zero-padded to the 16-bit symbol boundary, then chunked into blocks of
//! `threshold` symbols; share i carries each block's polynomial evaluated at
//! point i. Any `threshold` shares interpolate the message; extra shares are
//! cross-checked so that no single message is ever ambiguous.

use super::gf16;
use crate::bits::Bits;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RsConfig {
    pub n_shares: u16,
}

impl RsConfig {
    pub fn new(n_shares: u16) -> RsConfig {
        assert!(n_shares >= 1);
        RsConfig { n_shares }
    }

    /// n_B - floor(n_B / 2): the count of shares that determines a message.
    pub fn threshold(&self) -> u16 {
        self.n_shares - self.n_shares / 2
    }

    pub fn field_bits(&self) -> u8 {
        16
    }

    /// Frame length in symbols for a message of `bit_len` bits.
    pub fn frame_symbols(bit_len: u64) -> usize {
        let msg_bytes = (bit_len as usize).div_ceil(8);
        4 + msg_bytes.div_ceil(2)
    }

    /// Symbols per share for a message of `bit_len` bits.
    pub fn share_symbols(&self, bit_len: u64) -> usize {
        Self::frame_symbols(bit_len).div_ceil(self.threshold() as usize)
    }
}

pub type Share = Vec<u16>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeFailure {
    /// Fewer shares than the threshold; not a fault.
    InsufficientShares,
    /// Shares are not consistent with any single message.
    Inconsistent,
    /// Decoded length exceeds the cap; signals adversarial padding.
    Oversize,
    /// Duplicate or out-of-range share index.
    BadIndex,
}

fn frame(m: &Bits) -> Vec<u16> {
    let mut bytes = Vec::with_capacity(8 + m.as_bytes().len() + 1);
    bytes.extend_from_slice(&(m.len() as u64).to_be_bytes());
    bytes.extend_from_slice(m.as_bytes());
    if bytes.len() % 2 != 0 {
        bytes.push(0);
    }
    bytes
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect()
}

fn unframe(symbols: &[u16], length_cap_bits: u64) -> Result<Bits, DecodeFailure> {
    if symbols.len() < 4 {
        return Err(DecodeFailure::Inconsistent);
    }
    let mut len_bytes = [0u8; 8];
    for i in 0..4 {
        len_bytes[2 * i..2 * i + 2].copy_from_slice(&symbols[i].to_be_bytes());
    }
    let bit_len = u64::from_be_bytes(len_bytes);
    if bit_len > length_cap_bits {
        return Err(DecodeFailure::Oversize);
    }
    let avail_bits = (symbols.len() - 4) as u64 * 16;
    if bit_len > avail_bits {
        return Err(DecodeFailure::Inconsistent);
    }
    let mut bytes = Vec::with_capacity(symbols.len() * 2 - 8);
    for s in &symbols[4..] {
        bytes.extend_from_slice(&s.to_be_bytes());
    }
    let msg_bytes = (bit_len as usize).div_ceil(8);
    // padding beyond the message must be zero for the encoding to be canonical
    if bytes[msg_bytes..].iter().any(|&b| b != 0) {
        return Err(DecodeFailure::Inconsistent);
    }
    bytes.truncate(msg_bytes);
    let out = Bits::from_bytes_len(bytes.clone(), bit_len as usize);
    if out.as_bytes() != bytes.as_slice() {
        // nonzero bits past the declared length
        return Err(DecodeFailure::Inconsistent);
    }
    Ok(out)
}

/// Splits `m` into n_B shares; deterministic.
pub fn rs_encode(m: &Bits, cfg: RsConfig) -> Vec<Share> {
    let t = cfg.threshold() as usize;
    let mut data = frame(m);
    let blocks = data.len().div_ceil(t);
    data.resize(blocks * t, 0);
    let mut shares = vec![Vec::with_capacity(blocks); cfg.n_shares as usize];
    for b in 0..blocks {
        let coeffs = &data[b * t..(b + 1) * t];
        for (i, share) in shares.iter_mut().enumerate() {
            share.push(gf16::poly_eval(coeffs, (i + 1) as u16));
        }
    }
    shares
}

/// Reconstructs the message from indexed shares (1-based indices).
///
/// Interpolates from the `threshold` lowest-index shares and verifies every
/// remaining share against the interpolated polynomials, so the output is the
/// unique message consistent with *all* given shares.
pub fn rs_decode(
    shares: &[(u16, Share)],
    cfg: RsConfig,
    length_cap_bits: u64,
) -> Result<Bits, DecodeFailure> {
    let t = cfg.threshold() as usize;
    if shares.len() < t {
        return Err(DecodeFailure::InsufficientShares);
    }
    let mut sorted: Vec<&(u16, Share)> = shares.iter().collect();
    sorted.sort_by_key(|(i, _)| *i);
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(DecodeFailure::BadIndex);
        }
    }
    if sorted[0].0 == 0 || sorted.last().unwrap().0 > cfg.n_shares {
        return Err(DecodeFailure::BadIndex);
    }
    let blocks = sorted[0].1.len();
    if blocks == 0 || sorted.iter().any(|(_, s)| s.len() != blocks) {
        return Err(DecodeFailure::Inconsistent);
    }

    let base = &sorted[..t];
    let xs: Vec<u16> = base.iter().map(|(i, _)| *i).collect();

    // master polynomial M(x) = prod (x + x_j)
    let mut master = vec![0u16; t + 1];
    master[0] = 1;
    let mut deg = 0usize;
    for &x in &xs {
        // multiply by (x + x_j)
        for k in (0..=deg).rev() {
            let c = master[k];
            master[k + 1] ^= c;
            master[k] = gf16::mul(c, x);
        }
        deg += 1;
    }

    // Lagrange: coeffs = sum_j y_j / M'(x_j) * (M / (x + x_j))
    let mut data = Vec::with_capacity(blocks * t);
    let mut quotients: Vec<Vec<u16>> = Vec::with_capacity(t);
    let mut denoms: Vec<u16> = Vec::with_capacity(t);
    for &xj in &xs {
        // synthetic division of M by (x + xj)
        let mut q = vec![0u16; t];
        let mut carry = 0u16;
        for k in (0..=t).rev() {
            let c = gf16::add(master[k], gf16::mul(carry, xj));
            if k > 0 {
                q[k - 1] = c;
                carry = c;
            }
        }
        let d = gf16::poly_eval(&q, xj);
        if d == 0 {
            return Err(DecodeFailure::Inconsistent);
        }
        quotients.push(q);
        denoms.push(d);
    }
    for b in 0..blocks {
        let mut coeffs = vec![0u16; t];
        for (j, (_, share)) in base.iter().enumerate() {
            let scale = gf16::div(share[b], denoms[j]);
            if scale != 0 {
                for (c, &qk) in coeffs.iter_mut().zip(quotients[j].iter()) {
                    *c = gf16::add(*c, gf16::mul(scale, qk));
                }
            }
        }
        // cross-check the shares beyond the interpolation set
        for (i, share) in sorted[t..].iter() {
            if gf16::poly_eval(&coeffs, *i) != share[b] {
                return Err(DecodeFailure::Inconsistent);
            }
        }
        data.extend_from_slice(&coeffs);
    }
    unframe(&data, length_cap_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Bits {
        let mut b = Bits::with_capacity(len);
        for _ in 0..len {
            b.push(rng.gen_bool(0.5));
        }
        b
    }

    #[test]
    fn single_share_carries_message() {
        let m = Bits::from_bytes(b"hello".to_vec());
        let cfg = RsConfig::new(1);
        let shares = rs_encode(&m, cfg);
        assert_eq!(shares.len(), 1);
        let out = rs_decode(&[(1, shares[0].clone())], cfg, 1 << 20).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn threshold_roundtrip_and_insufficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_bits(&mut rng, 333);
        let cfg = RsConfig::new(7);
        assert_eq!(cfg.threshold(), 4);
        let shares = rs_encode(&m, cfg);
        let subset: Vec<(u16, Share)> = (0..4).map(|i| (i + 1, shares[i as usize].clone())).collect();
        assert_eq!(rs_decode(&subset, cfg, 1000).unwrap(), m);
        assert_eq!(
            rs_decode(&subset[..3], cfg, 1000),
            Err(DecodeFailure::InsufficientShares)
        );
    }

    #[test]
    fn all_threshold_subsets_reconstruct() {
        // spec example at n_B = 7: every C(7, 4) subset decodes the message
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cfg = RsConfig::new(7);
        for _ in 0..20 {
            let len = rng.gen_range(1..400);
            let m = random_bits(&mut rng, len);
            let shares = rs_encode(&m, cfg);
            crate::util::for_each_combination(7, 4, |idx| {
                let subset: Vec<(u16, Share)> = idx
                    .iter()
                    .map(|&i| ((i + 1) as u16, shares[i].clone()))
                    .collect();
                assert_eq!(rs_decode(&subset, cfg, 512).unwrap(), m);
                true
            });
        }
    }

    #[test]
    fn oversize_decode_fails() {
        // encode an (L+1)-bit message, decode with cap L
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_bits(&mut rng, 101);
        let cfg = RsConfig::new(5);
        let shares = rs_encode(&m, cfg);
        let subset: Vec<(u16, Share)> = (0..3).map(|i| (i + 1, shares[i as usize].clone())).collect();
        assert_eq!(rs_decode(&subset, cfg, 100), Err(DecodeFailure::Oversize));
        assert_eq!(rs_decode(&subset, cfg, 101).unwrap(), m);
    }

    #[test]
    fn tampered_share_is_inconsistent() {
        let m = Bits::from_bytes(vec![0xab; 40]);
        let cfg = RsConfig::new(6);
        let mut shares = rs_encode(&m, cfg);
        shares[5][0] ^= 1;
        let subset: Vec<(u16, Share)> = (0..6).map(|i| (i + 1, shares[i as usize].clone())).collect();
        assert_eq!(rs_decode(&subset, cfg, 1000), Err(DecodeFailure::Inconsistent));
    }

    #[test]
    fn share_size_is_linear_in_l_over_nb() {
        // spec example: L = 2^16, n_B = 16 -> share bits <= 2 L / 16 + header
        let l = 1u64 << 16;
        let cfg = RsConfig::new(16);
        let share_bits = cfg.share_symbols(l) * 16;
        assert!(share_bits as u64 <= 2 * l / 16 + 128, "share_bits = {share_bits}");
    }

    #[test]
    fn duplicate_index_rejected() {
        let m = Bits::from_bytes(vec![1, 2, 3]);
        let cfg = RsConfig::new(4);
        let shares = rs_encode(&m, cfg);
        let subset = vec![(1, shares[0].clone()), (1, shares[0].clone())];
        assert_eq!(rs_decode(&subset, cfg, 1000), Err(DecodeFailure::BadIndex));
    }
}
