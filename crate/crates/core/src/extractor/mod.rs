//! Explicit biregular extractor graphs with verified expansion, and the
//! committee-assignment schemes built on them.
//!
//! Construction is construct-and-certify: candidate graphs are deterministic
//! unions of seeded pseudorandom permutations with the degree escalated until
//! the certificate holds. The complete bipartite multigraph (one edge per
//! pair) is the terminal candidate; it satisfies the extractor definition
//! with zero slack and the assignment property outright whenever alpha < beta.

pub mod assign;
pub mod spectral;

pub use assign::{
    assign_parties_to_committees_unknown_l, assign_parties_to_supernodes,
    assign_supernodes_to_committees, committee_graph, committee_graph_with_floor, lean_committee_floor,
    lean_supernode_floor,
    Assignment, AssignmentParams, Certificate,
};

use num_rational::Ratio;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Exact rational protocol parameter (epsilon, alpha, beta, mu).
pub type Rat = Ratio<i64>;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

pub fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Fixed seed for all graph constructions; recorded in cache headers.
pub const CONSTRUCTION_SEED: u64 = 0x15EED_CA11;

#[derive(Debug, Error)]
pub enum ExtractorError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

/// Explicit biregular bipartite multigraph with a verified expansion
/// certificate.
#[derive(Debug, Clone)]
pub struct ExtractorGraph {
    pub left_size: usize,
    pub right_size: usize,
    pub left_degree: usize,
    /// adjacency[u] = right neighbors of u, with multiplicity, sorted.
    pub adjacency: Vec<Vec<u32>>,
    /// Declared (k, epsilon).
    pub k: usize,
    pub epsilon: Rat,
    /// Certified normalized second singular value.
    pub lambda: f64,
}

impl ExtractorGraph {
    /// Multiplicity matrix, counts[u][v].
    pub fn counts(&self) -> Vec<Vec<u32>> {
        let mut c = vec![vec![0u32; self.right_size]; self.left_size];
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                c[u][v as usize] += 1;
            }
        }
        c
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.right_size];
        for nbrs in &self.adjacency {
            for &v in nbrs {
                d[v as usize] += 1;
            }
        }
        d
    }

    /// |E(S, T)| with multiplicity.
    pub fn edges_between(&self, s: &[usize], t_mask: &[bool]) -> usize {
        s.iter()
            .map(|&u| {
                self.adjacency[u]
                    .iter()
                    .filter(|&&v| t_mask[v as usize])
                    .count()
            })
            .sum()
    }

    /// Raw Definition check: |E(S,T)/(D|S|) - |T|/m| < eps for the given S
    /// and T (as a mask). Exact rational comparison.
    pub fn definition_holds(&self, s: &[usize], t_mask: &[bool]) -> bool {
        let e = self.edges_between(s, t_mask) as i64;
        let d = (self.left_degree * s.len()) as i64;
        let t_sz = t_mask.iter().filter(|&&b| b).count() as i64;
        let m = self.right_size as i64;
        let lhs = (Rat::new(e, d) - Rat::new(t_sz, m)).abs();
        lhs < self.epsilon
    }
}

/// Deterministic union of `d` pseudorandom permutations of 0..n. When d = n
/// the cyclic-shift family is used, which yields the complete bipartite
/// multigraph exactly.
pub(crate) fn permutation_union(n: usize, d: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut adjacency = vec![Vec::with_capacity(d); n];
    if d >= n {
        for (u, nbrs) in adjacency.iter_mut().enumerate() {
            for j in 0..d {
                nbrs.push(((u + j) % n) as u32);
            }
            nbrs.sort_unstable();
        }
        return adjacency;
    }
    for layer in 0..d {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (layer as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (n as u64) << 32,
        );
        perm.shuffle(&mut rng);
        for (u, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.push(perm[u]);
        }
    }
    for nbrs in adjacency.iter_mut() {
        nbrs.sort_unstable();
    }
    adjacency
}

pub(crate) fn degree_candidates_pub(n: usize) -> Vec<usize> {
    degree_candidates(n)
}

fn degree_candidates(n: usize) -> Vec<usize> {
    let mut ds = Vec::new();
    let mut d = 2;
    while d < n {
        ds.push(d);
        d += if d < 16 { 2 } else { d / 4 };
    }
    ds.push(n);
    ds
}

/// Builds an explicit (k, eps)-extractor with both sides of size n: the
/// minimal candidate degree whose spectral certificate
/// lambda <= eps * sqrt(2 alpha), alpha = k/n, verifies is frozen.
pub fn build_extractor(n: usize, k: usize, epsilon: Rat) -> Result<ExtractorGraph, ExtractorError> {
    if n == 0 || k == 0 || k > n {
        return Err(ExtractorError::InvalidParams(format!(
            "need 1 <= k <= n, got k={k} n={n}"
        )));
    }
    if epsilon <= Rat::new(0, 1) {
        return Err(ExtractorError::InvalidParams("epsilon must be positive".into()));
    }
    let alpha = k as f64 / n as f64;
    let bound = rat_f64(epsilon) * (2.0 * alpha).sqrt();
    for d in degree_candidates(n) {
        let adjacency = permutation_union(n, d, CONSTRUCTION_SEED);
        let counts = {
            let mut c = vec![vec![0u32; n]; n];
            for (u, nbrs) in adjacency.iter().enumerate() {
                for &v in nbrs {
                    c[u][v as usize] += 1;
                }
            }
            c
        };
        let lambda = spectral::second_singular_normalized(&counts, d);
        if lambda + 1e-9 <= bound {
            return Ok(ExtractorGraph {
                left_size: n,
                right_size: n,
                left_degree: d,
                adjacency,
                k,
                epsilon,
                lambda,
            });
        }
    }
    Err(ExtractorError::Construction(format!(
        "no candidate degree certified for n={n} k={k} eps={epsilon}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn complete_graph_satisfies_definition_exactly() {
        // E(S,T)/(D|S|) = |T|/n with zero slack for every S, T
        let g = ExtractorGraph {
            left_size: 6,
            right_size: 6,
            left_degree: 6,
            adjacency: permutation_union(6, 6, CONSTRUCTION_SEED),
            k: 1,
            epsilon: rat(1, 100),
            lambda: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.5)).collect();
            if s.is_empty() {
                continue;
            }
            let t_mask: Vec<bool> = (0..6).map(|_| rng.gen_bool(0.5)).collect();
            let e = g.edges_between(&s, &t_mask);
            let t_sz = t_mask.iter().filter(|&&b| b).count();
            assert_eq!(e, s.len() * t_sz);
        }
    }

    #[test]
    fn built_graph_passes_spec_example_parameters() {
        // n = 64, alpha = 1/4, eps = 1/8
        let g = build_extractor(64, 16, rat(1, 8)).unwrap();
        let bound = rat_f64(rat(1, 8)) * (2.0f64 * 0.25).sqrt();
        assert!(g.lambda <= bound, "lambda {} > bound {bound}", g.lambda);
        assert!(g.adjacency.iter().all(|nbrs| nbrs.len() == g.left_degree));
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build_extractor(32, 8, rat(1, 4)).unwrap();
        let b = build_extractor(32, 8, rat(1, 4)).unwrap();
        assert_eq!(a.adjacency, b.adjacency);
        assert_eq!(a.left_degree, b.left_degree);
    }

    #[test]
    fn degree_accounting_is_exact() {
        let g = build_extractor(20, 5, rat(1, 3)).unwrap();
        let left_sum: usize = g.adjacency.iter().map(|n| n.len()).sum();
        let right_sum: usize = g.right_degrees().iter().sum();
        assert_eq!(left_sum, g.left_degree * g.left_size);
        assert_eq!(left_sum, right_sum);
    }

    #[test]
    fn spectral_certificate_implies_sampled_definition_checks() {
        let n = 14;
        let g = build_extractor(n, 4, rat(1, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // all S of size exactly ceil(alpha n) = 4, sampled T
        crate::util::for_each_combination(n, 4, |s| {
            for _ in 0..20 {
                let t_mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
                assert!(g.definition_holds(s, &t_mask), "S={s:?}");
            }
            true
        });
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(build_extractor(8, 0, rat(1, 4)).is_err());
        assert!(build_extractor(8, 9, rat(1, 4)).is_err());
        assert!(build_extractor(8, 2, rat(0, 1)).is_err());
    }
}
