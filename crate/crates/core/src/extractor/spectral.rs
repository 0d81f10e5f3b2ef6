//! Dense symmetric eigenvalues via cyclic Jacobi; enough for certifying
//! second singular values of committee-scale bipartite adjacency matrices.

/// Eigenvalues of a symmetric matrix, descending. The input is consumed.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(a.iter().all(|r| r.len() == n));
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s
    };
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1.0);
    let tol = (scale * 1e-14).powi(2) * (n * n) as f64;
    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= scale * 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Normalized second singular value of a bipartite count matrix whose left
/// side is `d`-regular: sigma_2(B) / d.
pub fn second_singular_normalized(counts: &[Vec<u32>], d: usize) -> f64 {
    let n = counts.len();
    let m = counts[0].len();
    // gram = B B^T (n x n)
    let mut gram = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..m {
                s += counts[i][k] as f64 * counts[j][k] as f64;
            }
            gram[i][j] = s;
            gram[j][i] = s;
        }
    }
    let eig = symmetric_eigenvalues(gram);
    let mut sigma2_sq = if eig.len() > 1 { eig[1].max(0.0) } else { 0.0 };
    if sigma2_sq < eig[0].abs() * 1e-12 {
        sigma2_sq = 0.0; // numerically zero relative to the top eigenvalue
    }
    sigma2_sq.sqrt() / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let a = vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        let e = symmetric_eigenvalues(a);
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
        assert!((e[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let e = symmetric_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_bipartite_has_zero_second_singular() {
        let n = 8;
        let counts = vec![vec![1u32; n]; n];
        let lam = second_singular_normalized(&counts, n);
        assert!(lam < 1e-9, "lambda = {lam}");
    }

    #[test]
    fn cycle_union_second_singular_matches_theory() {
        // union of identity and one cyclic shift on n=6: B = I + P.
        // Singular values are |1 + w^k| over 6th roots of unity; the second
        // largest is |1 + w| = 2 cos(pi/6) = sqrt(3).
        let n = 6;
        let mut counts = vec![vec![0u32; n]; n];
        for i in 0..n {
            counts[i][i] += 1;
            counts[i][(i + 1) % n] += 1;
        }
        let lam = second_singular_normalized(&counts, 2);
        assert!((lam - 3f64.sqrt() / 2.0).abs() < 1e-9, "lambda = {lam}");
    }
}
