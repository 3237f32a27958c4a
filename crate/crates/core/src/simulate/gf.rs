//! Binary extension fields `GF(2^8)` and `GF(2^16)` via log/antilog tables.

use std::sync::OnceLock;

/// Reduction polynomial for `GF(2^8)`.
pub const POLY_GF256: u32 = 0x11B;
/// Reduction polynomial for `GF(2^16)`.
pub const POLY_GF65536: u32 = 0x1002D;

#[derive(Debug, Clone)]
pub struct GfTables {
    bits: u32,
    generator: u16,
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// Carry-less product reduced modulo `poly`.
fn mul_slow(a: u32, b: u32, poly: u32, bits: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << bits) != 0 {
            a ^= poly;
        }
    }
    acc
}

impl GfTables {
    /// Builds tables for `GF(2^bits)` modulo `poly`, using the smallest element
    /// that generates the multiplicative group. `None` if the polynomial is not
    /// irreducible (no generator exists).
    pub fn new(bits: u32, poly: u32) -> Option<Self> {
        assert!((2..=16).contains(&bits));
        let order = 1u32 << bits;
        let group = (order - 1) as usize;
        'candidates: for g in 2..order {
            let mut exp = vec![0u16; 2 * group];
            let mut log = vec![0u16; order as usize];
            let mut x = 1u32;
            for (i, slot) in exp.iter_mut().take(group).enumerate() {
                if x == 1 && i > 0 {
                    continue 'candidates;
                }
                *slot = x as u16;
                log[x as usize] = i as u16;
                x = mul_slow(x, g, poly, bits);
            }
            if x != 1 {
                // Not a field: powers of g never return to 1.
                return None;
            }
            let (lo, hi) = exp.split_at_mut(group);
            hi.copy_from_slice(lo);
            return Some(Self { bits, generator: g as u16, exp, log });
        }
        None
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn order(&self) -> u32 {
        1 << self.bits
    }

    pub fn generator(&self) -> u16 {
        self.generator
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "zero has no inverse");
        let group = self.order() as usize - 1;
        self.exp[(group - self.log[a as usize] as usize) % group]
    }
}

pub fn gf256() -> &'static GfTables {
    static T: OnceLock<GfTables> = OnceLock::new();
    T.get_or_init(|| GfTables::new(8, POLY_GF256).expect("0x11B is irreducible"))
}

pub fn gf65536() -> &'static GfTables {
    static T: OnceLock<GfTables> = OnceLock::new();
    T.get_or_init(|| GfTables::new(16, POLY_GF65536).expect("0x1002D is irreducible"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aes_field_known_products() {
        let f = gf256();
        // FIPS-197 worked example: {57} x {83} = {c1}.
        assert_eq!(f.mul(0x57, 0x83), 0xc1);
        assert_eq!(f.mul(0x57, 0x13), 0xfe);
        // x alone does not generate GF(2^8) under 0x11B.
        assert_eq!(f.generator(), 3);
    }

    #[test]
    fn tables_agree_with_slow_multiply() {
        let f = gf256();
        for a in 0..256u32 {
            for b in 0..256u32 {
                assert_eq!(f.mul(a as u16, b as u16) as u32, mul_slow(a, b, POLY_GF256, 8));
            }
        }
    }

    #[test]
    fn inverses() {
        for f in [gf256(), gf65536()] {
            for a in (1..f.order()).step_by(97) {
                assert_eq!(f.mul(a as u16, f.inv(a as u16)), 1);
            }
        }
    }

    #[test]
    fn wide_field_is_a_field() {
        let f = gf65536();
        assert_eq!(f.order(), 65536);
        for (a, b) in [(0x1234u32, 0xbeefu32), (0xffff, 0xffff), (2, 0x8000)] {
            assert_eq!(f.mul(a as u16, b as u16) as u32, mul_slow(a, b, POLY_GF65536, 16));
        }
    }

    #[test]
    fn reducible_polynomial_is_rejected() {
        // x^8 + 1 = (x + 1)^8.
        assert!(GfTables::new(8, 0x101).is_none());
    }
}
