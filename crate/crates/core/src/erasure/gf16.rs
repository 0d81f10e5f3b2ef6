//! GF(2^16) arithmetic via log/antilog tables.
//!
//! One field covers every committee size the protocols produce (n_B <= 65535
//! evaluation points). Generator alpha = 2 over the primitive polynomial
//! x^16 + x^12 + x^3 + x + 1.

use std::sync::OnceLock;

const POLY: u32 = 0x1100B;
const ORDER: usize = 65535;

struct Tables {
    exp: Vec<u16>, // exp[i] = alpha^i, doubled for mod-free lookups
    log: Vec<u16>, // log[a] for a != 0
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exp = vec![0u16; 2 * ORDER];
        let mut log = vec![0u16; ORDER + 1];
        let mut x: u32 = 1;
        for i in 0..ORDER {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & 0x10000 != 0 {
                x ^= POLY;
            }
        }
        debug_assert_eq!(x, 1, "polynomial is not primitive");
        for i in 0..ORDER {
            exp[ORDER + i] = exp[i];
        }
        Tables { exp, log }
    })
}

#[inline]
pub fn add(a: u16, b: u16) -> u16 {
    a ^ b
}

#[inline]
pub fn mul(a: u16, b: u16) -> u16 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

#[inline]
pub fn inv(a: u16) -> u16 {
    assert!(a != 0, "inverse of zero");
    let t = tables();
    t.exp[ORDER - t.log[a as usize] as usize]
}

#[inline]
pub fn div(a: u16, b: u16) -> u16 {
    mul(a, inv(b))
}

/// Horner evaluation of a polynomial with coefficients low-to-high.
pub fn poly_eval(coeffs: &[u16], x: u16) -> u16 {
    let mut acc = 0u16;
    for &c in coeffs.iter().rev() {
        acc = add(mul(acc, x), c);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_spot_checks() {
        let vals = [1u16, 2, 3, 0x1234, 0xffff, 0x8000];
        for &a in &vals {
            assert_eq!(mul(a, inv(a)), 1);
            assert_eq!(mul(a, 1), a);
            assert_eq!(mul(a, 0), 0);
            for &b in &vals {
                assert_eq!(mul(a, b), mul(b, a));
                for &c in &vals {
                    assert_eq!(mul(a, add(b, c)), add(mul(a, b), mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn generator_has_full_order() {
        // alpha^65535 = 1 and no smaller power of two-ish divisors collapse
        let t = tables();
        assert_eq!(t.exp[0], 1);
        assert_eq!(t.exp[ORDER - 1], inv(2));
        // table construction already asserts the cycle closes at ORDER
        let mut seen = vec![false; ORDER + 1];
        for i in 0..ORDER {
            let v = t.exp[i] as usize;
            assert!(!seen[v], "alpha repeats before full order at {i}");
            seen[v] = true;
        }
    }

    #[test]
    fn poly_eval_horner() {
        // p(x) = 3 + 2x + x^2 over GF(2^16): p(2) = 3 ^ 4 ^ 4 = 3
        assert_eq!(poly_eval(&[3, 2, 1], 2), add(3, add(mul(2, 2), mul(2, 2))));
    }
}
