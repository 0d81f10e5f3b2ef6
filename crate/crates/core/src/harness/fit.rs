//! Least-squares fits for the scaling reports.

/// Ordinary least squares y = X b via normal equations; returns b.
/// Feature count is tiny (<= 3), so the direct solve is fine.
pub fn least_squares(xs: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
    let k = xs[0].len();
    let mut ata = vec![vec![0.0f64; k]; k];
    let mut aty = vec![0.0f64; k];
    for (row, &y) in xs.iter().zip(ys) {
        for i in 0..k {
            aty[i] += row[i] * y;
            for j in 0..k {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    let mut a = ata;
    let mut b = aty;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        if p.abs() < 1e-12 {
            continue;
        }
        for row in 0..k {
            if row == col {
                continue;
            }
            let f = a[row][col] / p;
            for c in 0..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    (0..k)
        .map(|i| if a[i][i].abs() < 1e-12 { 0.0 } else { b[i] / a[i][i] })
        .collect()
}

/// Simple linear regression y = a x + c with the coefficient of
/// determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let c = my - a * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (a * x + c);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (a, c, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_relation() {
        let xs: Vec<f64> = (1..=8).map(|x| x as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 2.0).collect();
        let (a, c, r2) = linear_fit(&xs, &ys);
        assert!((a - 3.0).abs() < 1e-9);
        assert!((c - 2.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_on_planted_coefficients() {
        // y = 2 f0 + 0 f1 + 5 f2
        let xs: Vec<Vec<f64>> = (1..20)
            .map(|i| {
                let i = i as f64;
                vec![i, i * i, (i * 3.0).sqrt()]
            })
            .collect();
        let ys: Vec<f64> = xs.iter().map(|r| 2.0 * r[0] + 5.0 * r[2]).collect();
        let b = least_squares(&xs, &ys);
        assert!((b[0] - 2.0).abs() < 1e-6, "{b:?}");
        assert!(b[1].abs() < 1e-6, "{b:?}");
        assert!((b[2] - 5.0).abs() < 1e-6, "{b:?}");
    }
}
