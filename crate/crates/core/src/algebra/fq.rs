//! The residue field F_{2^f} for 1 <= f <= 4.
//!
//! Elements are bit vectors in the polynomial basis modulo a fixed
//! irreducible polynomial: x+1 (f=1), x^2+x+1, x^3+x+1, x^4+x+1.

use crate::error::{Error, Result};
use std::fmt;

pub const MAX_DEGREE: u8 = 4;

const MODULI: [u8; 5] = [0, 0b11, 0b111, 0b1011, 0b10011];

const fn clmul_reduce(a: u8, b: u8, f: usize) -> u8 {
    let mut acc: u16 = 0;
    let mut i = 0;
    while i < 8 {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u16) << i;
        }
        i += 1;
    }
    let modulus = MODULI[f] as u16;
    let mut deg = 15;
    while deg >= f {
        if (acc >> deg) & 1 == 1 {
            acc ^= modulus << (deg - f);
        }
        deg -= 1;
    }
    acc as u8
}

const fn build_mul() -> [[[u8; 16]; 16]; 5] {
    let mut t = [[[0u8; 16]; 16]; 5];
    let mut f = 1;
    while f <= 4 {
        let size = 1usize << f;
        let mut a = 0;
        while a < size {
            let mut b = 0;
            while b < size {
                t[f][a][b] = clmul_reduce(a as u8, b as u8, f);
                b += 1;
            }
            a += 1;
        }
        f += 1;
    }
    t
}

const fn build_inv() -> [[u8; 16]; 5] {
    let mut t = [[0u8; 16]; 5];
    let mut f = 1;
    while f <= 4 {
        let size = 1usize << f;
        let mut a = 1;
        while a < size {
            let mut b = 1;
            while b < size {
                if MUL[f][a][b] == 1 {
                    t[f][a] = b as u8;
                }
                b += 1;
            }
            a += 1;
        }
        f += 1;
    }
    t
}

pub(crate) static MUL: [[[u8; 16]; 16]; 5] = build_mul();
pub(crate) static INV: [[u8; 16]; 5] = build_inv();

/// Raw multiplication on bit patterns, used by the series kernels.
#[inline]
pub(crate) fn raw_mul(f: u8, a: u8, b: u8) -> u8 {
    MUL[f as usize][a as usize][b as usize]
}

#[inline]
pub(crate) fn raw_inv(f: u8, a: u8) -> u8 {
    INV[f as usize][a as usize]
}

/// An element of F_{2^f}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq {
    f: u8,
    bits: u8,
}

pub fn check_degree(f: u8) -> Result<()> {
    if f == 0 || f > MAX_DEGREE {
        return Err(Error::Usage(format!(
            "residue degree f must lie in 1..={MAX_DEGREE}, got {f}"
        )));
    }
    Ok(())
}

// add and mul take self by value like the operator traits, but stay
// inherent so call sites match Series.
#[allow(clippy::should_implement_trait)]
impl Fq {
    pub fn new(f: u8, bits: u8) -> Self {
        debug_assert!((1..=MAX_DEGREE).contains(&f));
        Fq {
            f,
            bits: bits & ((1u8 << f) - 1),
        }
    }

    pub fn zero(f: u8) -> Self {
        Fq { f, bits: 0 }
    }

    pub fn one(f: u8) -> Self {
        Fq { f, bits: 1 }
    }

    /// The class of x in the polynomial basis; a generator of the
    /// multiplicative group for every supported modulus.
    pub fn generator(f: u8) -> Self {
        if f == 1 {
            Fq::one(1)
        } else {
            Fq { f, bits: 2 }
        }
    }

    pub fn degree(&self) -> u8 {
        self.f
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn order(f: u8) -> usize {
        1usize << f
    }

    pub fn all(f: u8) -> impl Iterator<Item = Fq> {
        (0..(1u8 << f)).map(move |b| Fq { f, bits: b })
    }

    pub fn nonzero(f: u8) -> impl Iterator<Item = Fq> {
        (1..(1u8 << f)).map(move |b| Fq { f, bits: b })
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn add(self, other: Fq) -> Fq {
        debug_assert_eq!(self.f, other.f);
        Fq {
            f: self.f,
            bits: self.bits ^ other.bits,
        }
    }

    pub fn mul(self, other: Fq) -> Fq {
        debug_assert_eq!(self.f, other.f);
        Fq {
            f: self.f,
            bits: raw_mul(self.f, self.bits, other.bits),
        }
    }

    pub fn inv(self) -> Result<Fq> {
        if self.bits == 0 {
            return Err(Error::Domain(
                "inversion of zero in the residue field".into(),
            ));
        }
        Ok(Fq {
            f: self.f,
            bits: raw_inv(self.f, self.bits),
        })
    }

    pub fn pow(self, mut e: u64) -> Fq {
        let mut base = self;
        let mut acc = Fq::one(self.f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace to F_2, returned as 0 or 1.
    pub fn trace_to_prime(self) -> u8 {
        let mut acc = self;
        let mut s = self;
        for _ in 1..self.f {
            s = s.mul(s);
            acc = acc.add(s);
        }
        acc.bits & 1
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits)
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_relations() {
        let g = Fq::new(2, 0b10);
        assert_eq!(g.mul(g), Fq::new(2, 0b11));
        assert_eq!(g.inv().unwrap(), Fq::new(2, 0b11));
        assert_eq!(Fq::one(1).add(Fq::one(1)), Fq::zero(1));
    }

    #[test]
    fn frobenius_order_and_cyclicity() {
        for f in 1..=MAX_DEGREE {
            for a in Fq::all(f) {
                assert_eq!(a.pow(1u64 << f), a);
            }
            let g = Fq::generator(f);
            let order = (1u64 << f) - 1;
            let mut seen = std::collections::HashSet::new();
            for e in 0..order {
                seen.insert(g.pow(e));
            }
            assert_eq!(seen.len() as u64, order);
        }
    }

    #[test]
    fn inverse_table() {
        for f in 1..=MAX_DEGREE {
            for a in Fq::nonzero(f) {
                assert_eq!(a.mul(a.inv().unwrap()), Fq::one(f));
            }
            assert!(Fq::zero(f).inv().is_err());
        }
    }

    #[test]
    fn trace_is_surjective_and_additive() {
        for f in 1..=MAX_DEGREE {
            let ones = Fq::all(f).filter(|a| a.trace_to_prime() == 1).count();
            assert_eq!(ones, 1 << (f - 1));
            for a in Fq::all(f) {
                for b in Fq::all(f) {
                    assert_eq!(
                        a.add(b).trace_to_prime(),
                        a.trace_to_prime() ^ b.trace_to_prime()
                    );
                }
            }
        }
    }
}
