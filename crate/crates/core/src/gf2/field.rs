//! Arithmetic in GF(2^n) for 2 ≤ n ≤ 64.
//!
//! Elements are polynomials over GF(2) packed into a `u64`, bit `i` holding
//! the coefficient of `x^i`. Each degree uses the lexicographically first
//! irreducible polynomial, i.e. the numerically smallest `x^n + r(x)` that is
//! irreducible. [`IRREDUCIBLE_LOW`] stores `r(x)`; for example degree 3 uses
//! x³+x+1 (`0x3`), degree 8 uses x⁸+x⁴+x³+x+1 (`0x1b`), and degree 16 uses
//! x¹⁶+x⁵+x³+x+1 (`0x2b`).

use crate::error::{Error, Result};

/// `IRREDUCIBLE_LOW[n - 2]` is the polynomial for degree `n` without its `x^n` term.
pub const IRREDUCIBLE_LOW: [u64; 63] = [
    0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9, // 2..=17
    0x9, 0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, 0x4b, // 18..=33
    0x1b, 0x5, 0x35, 0x3f, 0x63, 0x11, 0x39, 0x9, 0x27, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, // 34..=48
    0x71, 0x1d, 0x4b, 0x9, 0x47, 0x7d, 0x47, 0x95, 0x11, 0x63, 0x7b, 0x3, 0x27, 0x69, 0x3, // 49..=63
    0x1b, // 64
];

/// Registered reduction polynomial for degree `n` (without the `x^n` term).
pub fn irreducible_low(n: u32) -> Option<u64> {
    (2..=64).contains(&n).then(|| IRREDUCIBLE_LOW[n as usize - 2])
}

/// A field GF(2^n) with its registered modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2n {
    degree: u32,
    low: u64,
}

/// An element together with the degree of its field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub value: u64,
    pub degree: u32,
}

pub(crate) fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let a = a as u128;
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= a << i;
        b &= b - 1;
    }
    acc
}

impl Gf2n {
    pub fn new(degree: u32) -> Result<Self> {
        let low = irreducible_low(degree)
            .ok_or_else(|| Error::Config(format!("no irreducible polynomial registered for degree {degree}")))?;
        Ok(Gf2n { degree, low })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u128 {
        1u128 << self.degree
    }

    pub fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    /// Full modulus including the leading term.
    pub fn modulus(&self) -> u128 {
        (1u128 << self.degree) | self.low as u128
    }

    fn reduce(&self, mut p: u128) -> u64 {
        let n = self.degree;
        let modulus = self.modulus();
        while p >> n != 0 {
            let top = 127 - p.leading_zeros();
            p ^= modulus << (top - n);
        }
        p as u64
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a & !self.mask() == 0 && b & !self.mask() == 0);
        self.reduce(clmul(a, b))
    }

    pub fn pow(&self, mut base: u64, mut exp: u128) -> u64 {
        let mut acc = 1u64;
        while exp != 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via a^(2^n - 2); `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }

    pub fn elem(&self, value: u64) -> Result<FieldElem> {
        if value & !self.mask() != 0 {
            return Err(Error::Contract(format!("{value:#x} is not an element of GF(2^{})", self.degree)));
        }
        Ok(FieldElem { value, degree: self.degree })
    }
}

/// Product of two elements of the same field.
pub fn field_mul(a: FieldElem, b: FieldElem) -> Result<FieldElem> {
    if a.degree != b.degree {
        return Err(Error::Contract(format!(
            "field_mul across degrees {} and {}",
            a.degree, b.degree
        )));
    }
    let f = Gf2n::new(a.degree)?;
    let a = f.elem(a.value)?;
    let b = f.elem(b.value)?;
    Ok(FieldElem { value: f.mul(a.value, b.value), degree: f.degree })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Irreducibility by trial division, independent of the table and of Gf2n.
    fn poly_mod(mut a: u128, m: u128) -> u128 {
        let dm = 127 - m.leading_zeros();
        while a != 0 && 127 - a.leading_zeros() >= dm {
            a ^= m << (127 - a.leading_zeros() - dm);
        }
        a
    }

    fn irreducible_by_division(p: u128) -> bool {
        let deg = 127 - p.leading_zeros();
        for d in 1..=deg / 2 {
            for q in (1u128 << d)..(1u128 << (d + 1)) {
                if poly_mod(p, q) == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn table_is_lexicographically_first_for_small_degrees() {
        for n in 2..=16u32 {
            let f = Gf2n::new(n).unwrap();
            assert!(irreducible_by_division(f.modulus()), "degree {n}");
            for low in (1..f.modulus() as u64 & f.mask()).step_by(2) {
                let cand = (1u128 << n) | low as u128;
                assert!(!irreducible_by_division(cand), "degree {n}: {cand:#x} is smaller");
            }
        }
    }

    #[test]
    fn unregistered_degree_is_config_error() {
        assert!(matches!(Gf2n::new(1), Err(Error::Config(_))));
        assert!(matches!(Gf2n::new(65), Err(Error::Config(_))));
        let a = FieldElem { value: 1, degree: 70 };
        assert!(matches!(field_mul(a, a), Err(Error::Config(_))));
    }

    #[test]
    fn small_products() {
        let e = |v| FieldElem { value: v, degree: 3 };
        assert_eq!(field_mul(e(0b101), e(1)).unwrap(), e(0b101));
        assert_eq!(field_mul(e(0b010), e(0b010)).unwrap(), e(0b100));
        assert_eq!(field_mul(e(0b100), e(0b010)).unwrap(), e(0b011));
        assert!(field_mul(e(1), FieldElem { value: 1, degree: 4 }).is_err());
    }

    #[test]
    fn field_axioms_exhaustive_up_to_degree_8() {
        for n in 2..=8u32 {
            let f = Gf2n::new(n).unwrap();
            let q = 1u64 << n;
            for a in 0..q {
                if a != 0 {
                    let inv = f.inv(a).unwrap();
                    assert_eq!(f.mul(a, inv), 1, "inverse of {a} in GF(2^{n})");
                }
                for b in 0..q {
                    let ab = f.mul(a, b);
                    assert_eq!(ab, f.mul(b, a));
                    // sample c sparsely at the larger sizes to keep this quick
                    for c in (0..q).step_by(if n > 5 { 37 } else { 1 }) {
                        assert_eq!(f.mul(ab, c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, b ^ c), ab ^ f.mul(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn large_degrees_have_inverses() {
        for n in [16u32, 32, 64] {
            let f = Gf2n::new(n).unwrap();
            for a in [1u64, 2, 0xdead_beef & f.mask(), f.mask()] {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }
}
