//! Merkle accumulation with domain-separated SHA-256.
//!
//! Leaf hash = H(0x00 || data), internal = H(0x01 || left || right); a node
//! without a sibling is promoted unchanged. The single-leaf tree wraps the
//! leaf hash in one internal hash so a lone leaf is still distinguished from
//! its own digest.

use sha2::{Digest as _, Sha256};

pub const DIGEST_LEN: usize = 32;
/// Security parameter: digest size in bits.
pub const KAPPA: usize = 256;

pub type Digest = [u8; DIGEST_LEN];

const LEAF_TAG: u8 = 0x00;
const NODE_TAG: u8 = 0x01;

pub fn leaf_hash(data: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update([LEAF_TAG]);
    h.update(data);
    h.finalize().into()
}

fn node_hash(left: &Digest, right: &Digest) -> Digest {
    let mut h = Sha256::new();
    h.update([NODE_TAG]);
    h.update(left);
    h.update(right);
    h.finalize().into()
}

fn single_hash(child: &Digest) -> Digest {
    let mut h = Sha256::new();
    h.update([NODE_TAG]);
    h.update(child);
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleWitness {
    pub digests: Vec<Digest>,
}

/// Builds the tree over `leaves`, returning the root and one inclusion
/// witness per leaf. Deterministic.
pub fn mt_build(leaves: &[Vec<u8>]) -> (Digest, Vec<MerkleWitness>) {
    assert!(!leaves.is_empty(), "at least one leaf required");
    let n = leaves.len();
    let mut level: Vec<Digest> = leaves.iter().map(|l| leaf_hash(l)).collect();
    if n == 1 {
        return (single_hash(&level[0]), vec![MerkleWitness { digests: vec![] }]);
    }
    let mut witnesses: Vec<MerkleWitness> = vec![MerkleWitness { digests: vec![] }; n];
    // positions[i] = index of leaf i's ancestor in the current level
    let mut positions: Vec<usize> = (0..n).collect();
    while level.len() > 1 {
        let mut next: Vec<Digest> = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            next.push(if pair.len() == 2 {
                node_hash(&pair[0], &pair[1])
            } else {
                pair[0] // odd node promoted unchanged
            });
        }
        for i in 0..n {
            let pos = positions[i];
            let sib = pos ^ 1;
            if sib < level.len() {
                witnesses[i].digests.push(level[sib]);
            }
            positions[i] = pos / 2;
        }
        level = next;
    }
    (level[0], witnesses)
}

/// Recomputes the path from leaf `index` (1-based) through a tree of
/// `n_leaves` leaves and compares with `root`.
pub fn mt_verify(
    root: &Digest,
    n_leaves: usize,
    index: usize,
    leaf: &[u8],
    witness: &MerkleWitness,
) -> bool {
    if index == 0 || index > n_leaves || n_leaves == 0 {
        return false;
    }
    let mut h = leaf_hash(leaf);
    if n_leaves == 1 {
        return witness.digests.is_empty() && single_hash(&h) == *root;
    }
    let mut pos = index - 1;
    let mut width = n_leaves;
    let mut used = 0usize;
    while width > 1 {
        let sib = pos ^ 1;
        if sib < width {
            let Some(w) = witness.digests.get(used) else {
                return false;
            };
            used += 1;
            h = if pos % 2 == 0 {
                node_hash(&h, w)
            } else {
                node_hash(w, &h)
            };
        }
        pos /= 2;
        width = width.div_ceil(2);
    }
    used == witness.digests.len() && h == *root
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn leaves(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<u8>> {
        (0..n)
            .map(|_| {
                let len = rng.gen_range(1..40);
                (0..len).map(|_| rng.gen()).collect()
            })
            .collect()
    }

    #[test]
    fn single_leaf_root_wraps_leaf_hash() {
        let data = b"only".to_vec();
        let (root, wits) = mt_build(&[data.clone()]);
        assert!(wits[0].digests.is_empty());
        assert_eq!(root, single_hash(&leaf_hash(&data)));
        assert!(mt_verify(&root, 1, 1, &data, &wits[0]));
    }

    #[test]
    fn all_witnesses_verify_up_to_64_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=64 {
            let ls = leaves(&mut rng, n);
            let (root, wits) = mt_build(&ls);
            for i in 0..n {
                assert!(
                    mt_verify(&root, n, i + 1, &ls[i], &wits[i]),
                    "n={n} i={i}"
                );
                assert!(wits[i].digests.len() <= (n as f64).log2().ceil() as usize);
            }
        }
    }

    #[test]
    fn wrong_index_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ls = leaves(&mut rng, 9);
        let (root, wits) = mt_build(&ls);
        assert!(!mt_verify(&root, 9, 2, &ls[0], &wits[0]));
        assert!(!mt_verify(&root, 9, 0, &ls[0], &wits[0]));
        assert!(!mt_verify(&root, 9, 10, &ls[0], &wits[0]));
    }

    #[test]
    fn tampered_bits_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ls = leaves(&mut rng, 13);
        let (root, wits) = mt_build(&ls);
        for trial in 0..1000 {
            let i = rng.gen_range(0..13);
            match trial % 3 {
                0 => {
                    // flip a bit in the leaf
                    let mut bad = ls[i].clone();
                    let pos = rng.gen_range(0..bad.len() * 8);
                    bad[pos / 8] ^= 1 << (pos % 8);
                    assert!(!mt_verify(&root, 13, i + 1, &bad, &wits[i]));
                }
                1 => {
                    // flip a bit in the witness
                    let mut bad = wits[i].clone();
                    if bad.digests.is_empty() {
                        continue;
                    }
                    let d = rng.gen_range(0..bad.digests.len());
                    let pos = rng.gen_range(0..DIGEST_LEN * 8);
                    bad.digests[d][pos / 8] ^= 1 << (pos % 8);
                    assert!(!mt_verify(&root, 13, i + 1, &ls[i], &bad));
                }
                _ => {
                    // swap in another leaf of the same tree
                    let j = (i + 1) % 13;
                    if ls[i] != ls[j] {
                        assert!(!mt_verify(&root, 13, i + 1, &ls[j], &wits[i]));
                    }
                }
            }
        }
    }
}
