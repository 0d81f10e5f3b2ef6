//! Reed-Solomon coding and Merkle accumulation: the mechanics behind
//! supersending.

pub mod gf16;
pub mod merkle;
pub mod rs;

pub use merkle::{mt_build, mt_verify, Digest, MerkleWitness, DIGEST_LEN, KAPPA};
pub use rs::{rs_decode, rs_encode, DecodeFailure, RsConfig, Share};

use crate::bits::Bits;

/// One Reed-Solomon share plus its Merkle inclusion proof: the unit of
/// supersending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareBundle {
    pub root: Digest,
    /// 1-based share index.
    pub index: u16,
    pub share: Share,
    pub witness: MerkleWitness,
}

fn share_bytes(share: &Share) -> Vec<u8> {
    let mut out = Vec::with_capacity(share.len() * 2);
    for s in share {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

/// Encodes `m` into n_B bundles under one Merkle root.
pub fn make_bundles(m: &Bits, cfg: RsConfig) -> (Digest, Vec<ShareBundle>) {
    let shares = rs_encode(m, cfg);
    let leaves: Vec<Vec<u8>> = shares.iter().map(|s| share_bytes(s)).collect();
    let (root, witnesses) = mt_build(&leaves);
    let bundles = shares
        .into_iter()
        .zip(witnesses)
        .enumerate()
        .map(|(i, (share, witness))| ShareBundle {
            root,
            index: (i + 1) as u16,
            share,
            witness,
        })
        .collect();
    (root, bundles)
}

impl ShareBundle {
    /// Inclusion check against the bundle's own root.
    pub fn verify(&self, cfg: RsConfig) -> bool {
        self.index >= 1
            && self.index <= cfg.n_shares
            && mt_verify(
                &self.root,
                cfg.n_shares as usize,
                self.index as usize,
                &share_bytes(&self.share),
                &self.witness,
            )
    }

    /// Bit-exact wire format:
    /// root(32) || index(u16 BE) || shareLen(u32 BE) || share || witnessCount(u8) || digests.
    pub fn encode(&self) -> Vec<u8> {
        let sb = share_bytes(&self.share);
        let mut out = Vec::with_capacity(39 + sb.len() + self.witness.digests.len() * DIGEST_LEN);
        out.extend_from_slice(&self.root);
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&(sb.len() as u32).to_be_bytes());
        out.extend_from_slice(&sb);
        out.push(self.witness.digests.len() as u8);
        for d in &self.witness.digests {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<ShareBundle> {
        if bytes.len() < 39 {
            return None;
        }
        let mut root = [0u8; DIGEST_LEN];
        root.copy_from_slice(&bytes[..32]);
        let index = u16::from_be_bytes([bytes[32], bytes[33]]);
        let share_len = u32::from_be_bytes([bytes[34], bytes[35], bytes[36], bytes[37]]) as usize;
        if share_len % 2 != 0 || bytes.len() < 38 + share_len + 1 {
            return None;
        }
        let share: Share = bytes[38..38 + share_len]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        let wc = bytes[38 + share_len] as usize;
        let tail = &bytes[39 + share_len..];
        if tail.len() != wc * DIGEST_LEN {
            return None;
        }
        let digests = tail
            .chunks_exact(DIGEST_LEN)
            .map(|c| {
                let mut d = [0u8; DIGEST_LEN];
                d.copy_from_slice(c);
                d
            })
            .collect();
        Some(ShareBundle {
            root,
            index,
            share,
            witness: MerkleWitness { digests },
        })
    }

    pub fn encoded_len(&self) -> usize {
        39 + self.share.len() * 2 + self.witness.digests.len() * DIGEST_LEN
    }
}

/// Receiver-side size cap for a bundle of an (<= L)-bit message: the
/// O(L/n_B + kappa log n_B) bound with the exact header overheads.
pub fn bundle_size_cap(cfg: RsConfig, length_cap_bits: u64) -> usize {
    let witness_max = (cfg.n_shares as f64).log2().ceil() as usize;
    39 + cfg.share_symbols(length_cap_bits) * 2 + witness_max * DIGEST_LEN
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bundles_verify_and_roundtrip_wire_format() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut m = Bits::new();
        for _ in 0..500 {
            m.push(rng.gen_bool(0.5));
        }
        let cfg = RsConfig::new(9);
        let (root, bundles) = make_bundles(&m, cfg);
        for b in &bundles {
            assert_eq!(b.root, root);
            assert!(b.verify(cfg));
            let wire = b.encode();
            assert!(wire.len() <= bundle_size_cap(cfg, 500));
            assert_eq!(ShareBundle::decode(&wire).as_ref(), Some(b));
        }
        // decode from any majority of verified bundles
        let subset: Vec<(u16, Share)> = bundles[..5]
            .iter()
            .map(|b| (b.index, b.share.clone()))
            .collect();
        assert_eq!(rs_decode(&subset, cfg, 500).unwrap(), m);
    }

    #[test]
    fn substituted_share_fails_verification() {
        let m = Bits::from_bytes(vec![7; 64]);
        let cfg = RsConfig::new(8);
        let (_, bundles) = make_bundles(&m, cfg);
        // same encoding, different position
        let mut crossed = bundles[2].clone();
        crossed.share = bundles[3].share.clone();
        if bundles[2].share != bundles[3].share {
            assert!(!crossed.verify(cfg));
        }
    }

    #[test]
    fn truncated_wire_rejected() {
        let m = Bits::from_bytes(vec![1; 10]);
        let (_, bundles) = make_bundles(&m, RsConfig::new(4));
        let wire = bundles[0].encode();
        for cut in [0, 10, 38, wire.len() - 1] {
            assert!(ShareBundle::decode(&wire[..cut]).is_none());
        }
    }
}
