//! Small shared helpers.

/// Calls `f` with each k-subset of 0..n (as a sorted index slice).
/// Returns early if `f` returns false.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // advance to next combination
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
        if k == 0 {
            return;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_count_matches_binomial() {
        for n in 0..8 {
            for k in 0..=n {
                let mut cnt = 0u128;
                for_each_combination(n, k, |_| {
                    cnt += 1;
                    true
                });
                assert_eq!(cnt, binomial(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn early_exit() {
        let mut seen = 0;
        for_each_combination(6, 3, |_| {
            seen += 1;
            seen < 5
        });
        assert_eq!(seen, 5);
    }
}
