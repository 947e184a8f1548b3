//! Classes in the filtration quotients U/U^j, p^a/p^b and E^x/U^j.
//!
//! Each class holds its canonical representative: the polynomial obtained
//! by truncation, so equality is equality of coefficients.

use crate::algebra::{Series, Uniformizer};
use crate::error::{Error, Result};
use std::fmt;
use std::hash::{Hash, Hasher};

/// Pack the coefficients of exponents lo..hi into an integer, f bits each.
pub fn pack_bits(x: &Series, lo: i64, hi: i64) -> Result<u128> {
    let f = x.degree() as u32;
    let bits = x.bits_range(lo, hi)?;
    let mut key = 0u128;
    for (i, b) in bits.iter().enumerate() {
        key |= (*b as u128) << (f * i as u32);
    }
    Ok(key)
}

fn unpack_bits(f: u8, key: u128, lo: i64, hi: i64) -> Series {
    let mask = (1u128 << f) - 1;
    let bits: Vec<u8> = (0..(hi - lo))
        .map(|i| ((key >> (f as u32 * i as u32)) & mask) as u8)
        .collect();
    Series::from_bits(f, Uniformizer::Pi, lo, &bits, hi)
}

/// A class in U_E/U_E^j.
#[derive(Clone)]
pub struct UnitClass {
    rep: Series,
    modulus: i64,
}

impl UnitClass {
    pub fn new(x: &Series, j: i64) -> Result<Self> {
        if !x.is_unit() {
            return Err(Error::Domain(format!("{x} is not a unit")));
        }
        Ok(UnitClass {
            rep: x.reduce(j)?,
            modulus: j,
        })
    }

    pub fn one(f: u8, j: i64) -> Self {
        UnitClass {
            rep: Series::one(f, Uniformizer::Pi, j),
            modulus: j,
        }
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    /// Representative at precision equal to the modulus.
    pub fn rep(&self) -> &Series {
        &self.rep
    }

    /// Canonical representative padded to precision `prec`.
    pub fn lift(&self, prec: i64) -> Series {
        self.rep.pad_to(prec)
    }

    pub fn mul(&self, other: &UnitClass) -> UnitClass {
        assert_eq!(
            self.modulus, other.modulus,
            "unit classes of different levels"
        );
        UnitClass {
            rep: self.rep.mul(&other.rep),
            modulus: self.modulus,
        }
    }

    pub fn inv(&self) -> UnitClass {
        UnitClass {
            rep: self.rep.inv().expect("units are invertible"),
            modulus: self.modulus,
        }
    }

    pub fn pow(&self, e: i64) -> UnitClass {
        UnitClass {
            rep: self.rep.pow(e).expect("units are invertible"),
            modulus: self.modulus,
        }
    }

    pub fn is_one(&self) -> bool {
        self.key() == 1
    }

    pub fn key(&self) -> u128 {
        pack_bits(&self.rep, 0, self.modulus).expect("representative is known to its modulus")
    }

    pub fn from_key(f: u8, key: u128, j: i64) -> Self {
        UnitClass {
            rep: unpack_bits(f, key, 0, j),
            modulus: j,
        }
    }

    /// Level of the class: the largest k <= j with u in U^k.
    pub fn level(&self) -> i64 {
        let one = Series::one(self.rep.degree(), Uniformizer::Pi, self.modulus);
        let diff = self.rep.add(&one);
        diff.ord_lower_bound().min(self.modulus)
    }

    /// All classes of U/U^j in a fixed order.
    pub fn enumerate(f: u8, j: i64) -> Vec<UnitClass> {
        let q = 1u128 << f;
        let total = q.pow(j as u32);
        (0..total)
            .filter(|k| k & (q - 1) != 0)
            .map(|k| UnitClass::from_key(f, k, j))
            .collect()
    }
}

impl PartialEq for UnitClass {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.key() == other.key()
    }
}
impl Eq for UnitClass {}

impl Hash for UnitClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.modulus.hash(state);
        self.key().hash(state);
    }
}

impl fmt::Debug for UnitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] mod U^{}",
            self.rep.coeff_string(0, self.modulus),
            self.modulus
        )
    }
}

/// A class in p^lo / p^hi.
#[derive(Clone)]
pub struct AddClass {
    rep: Series,
    lo: i64,
    hi: i64,
}

impl AddClass {
    pub fn new(x: &Series, lo: i64, hi: i64) -> Result<Self> {
        assert!(lo <= hi, "empty additive quotient");
        let rep = x.reduce(hi)?;
        if rep.ord_lower_bound() < lo {
            return Err(Error::Domain(format!("{x} does not lie in p^{lo}")));
        }
        Ok(AddClass { rep, lo, hi })
    }

    pub fn zero(f: u8, lo: i64, hi: i64) -> Self {
        AddClass {
            rep: Series::zero(f, Uniformizer::Pi, hi),
            lo,
            hi,
        }
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn rep(&self) -> &Series {
        &self.rep
    }

    pub fn lift(&self, prec: i64) -> Series {
        self.rep.pad_to(prec)
    }

    pub fn add(&self, other: &AddClass) -> AddClass {
        assert_eq!(
            (self.lo, self.hi),
            (other.lo, other.hi),
            "classes of different quotients"
        );
        AddClass {
            rep: self.rep.add(&other.rep),
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// Membership in the starred subset: valuation exactly lo.
    pub fn is_primitive(&self) -> bool {
        self.rep.valuation() == Some(self.lo)
    }

    pub fn key(&self) -> u128 {
        pack_bits(&self.rep, self.lo, self.hi).expect("representative is known to its modulus")
    }

    pub fn from_key(f: u8, key: u128, lo: i64, hi: i64) -> Self {
        AddClass {
            rep: unpack_bits(f, key, lo, hi),
            lo,
            hi,
        }
    }

    /// All classes of p^lo/p^hi in a fixed order.
    pub fn enumerate(f: u8, lo: i64, hi: i64) -> Vec<AddClass> {
        let total = 1u128 << (f as u32 * (hi - lo) as u32);
        (0..total)
            .map(|k| AddClass::from_key(f, k, lo, hi))
            .collect()
    }
}

impl PartialEq for AddClass {
    fn eq(&self, other: &Self) -> bool {
        (self.lo, self.hi) == (other.lo, other.hi) && self.key() == other.key()
    }
}
impl Eq for AddClass {}

impl Hash for AddClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.lo, self.hi).hash(state);
        self.key().hash(state);
    }
}

impl fmt::Debug for AddClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] in p^{}/p^{}",
            self.rep.coeff_string(self.lo, self.hi),
            self.lo,
            self.hi
        )
    }
}

/// A class pi^v * u in E^x / U^j.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EStarClass {
    pub v: i64,
    pub u: UnitClass,
}

impl EStarClass {
    pub fn new(x: &Series, j: i64) -> Result<Self> {
        let v = x.ord()?;
        Ok(EStarClass {
            v,
            u: UnitClass::new(&x.shift(-v), j)?,
        })
    }

    pub fn from_unit(u: UnitClass) -> Self {
        EStarClass { v: 0, u }
    }

    pub fn one(f: u8, j: i64) -> Self {
        EStarClass {
            v: 0,
            u: UnitClass::one(f, j),
        }
    }

    pub fn modulus(&self) -> i64 {
        self.u.modulus()
    }

    pub fn mul(&self, other: &EStarClass) -> EStarClass {
        EStarClass {
            v: self.v + other.v,
            u: self.u.mul(&other.u),
        }
    }

    pub fn inv(&self) -> EStarClass {
        EStarClass {
            v: -self.v,
            u: self.u.inv(),
        }
    }

    pub fn lift(&self, prec: i64) -> Series {
        self.u.lift(prec).shift(self.v)
    }
}

impl fmt::Debug for EStarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi^{} * {:?}", self.v, self.u)
    }
}
