//! Arithmetic in GF(2^8) with primitive polynomial `x^8 + x^4 + x^3 + x^2 + 1`
//! (0x11D) and primitive element `alpha = 2`.

use std::sync::OnceLock;

pub const PRIMITIVE_POLY: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= PRIMITIVE_POLY;
            }
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Tables { exp, log }
    })
}

#[inline]
pub fn add(a: u8, b: u8) -> u8 {
    a ^ b
}

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

/// `a / b`; panics on division by zero.
#[inline]
pub fn div(a: u8, b: u8) -> u8 {
    assert!(b != 0, "division by zero in GF(256)");
    if a == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + 255 - t.log[b as usize] as usize]
}

#[inline]
pub fn inv(a: u8) -> u8 {
    div(1, a)
}

/// `alpha^e` for any integer exponent.
#[inline]
pub fn alpha_pow(e: i64) -> u8 {
    tables().exp[e.rem_euclid(255) as usize]
}

/// Discrete logarithm base alpha; `None` for zero.
#[inline]
pub fn log(a: u8) -> Option<u8> {
    (a != 0).then(|| tables().log[a as usize])
}

/// Horner evaluation of `p[0] x^{d} + ... + p[d]` (highest degree first).
pub fn poly_eval(p: &[u8], x: u8) -> u8 {
    p.iter().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_has_order_255() {
        let mut seen = [false; 256];
        for e in 0..255 {
            let v = alpha_pow(e);
            assert!(!seen[v as usize]);
            seen[v as usize] = true;
        }
        assert!(!seen[0]);
        assert_eq!(alpha_pow(255), 1);
        assert_eq!(alpha_pow(8), 0x1D);
    }

    #[test]
    fn field_axioms_on_samples() {
        for a in 0..=255u8 {
            if a != 0 {
                assert_eq!(mul(a, inv(a)), 1);
            }
            for b in [0u8, 1, 2, 0x53, 0xCA, 0xFF] {
                assert_eq!(mul(a, b), mul(b, a));
                if b != 0 {
                    assert_eq!(div(mul(a, b), b), a);
                }
                assert_eq!(mul(a, add(b, 7)), add(mul(a, b), mul(a, 7)));
            }
        }
    }

    #[test]
    fn carryless_reference() {
        // schoolbook multiply then reduce
        fn slow(a: u8, b: u8) -> u8 {
            let mut r: u16 = 0;
            for i in 0..8 {
                if b >> i & 1 == 1 {
                    r ^= (a as u16) << i;
                }
            }
            for i in (8..16).rev() {
                if r >> i & 1 == 1 {
                    r ^= PRIMITIVE_POLY << (i - 8);
                }
            }
            r as u8
        }
        for a in 0..=255u8 {
            for b in (0..=255u8).step_by(7) {
                assert_eq!(mul(a, b), slow(a, b));
            }
        }
    }
}
