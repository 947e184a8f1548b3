//! Truncated Laurent series over F_{2^f} with absolute precision.
//!
//! A `Series` is known modulo t^prec where t is the uniformizer named by
//! its tag. Coefficients are stored densely from the valuation up to
//! prec - 1. The zero-to-precision element has no coefficients and
//! valuation equal to its precision.

use super::fq::{raw_inv, raw_mul, Fq};
use crate::error::{Error, Result};
use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Uniformizer {
    Pi,
    Varpi,
}

impl Uniformizer {
    fn symbol(self) -> &'static str {
        match self {
            Uniformizer::Pi => "pi",
            Uniformizer::Varpi => "w",
        }
    }
}

#[derive(Clone)]
pub struct Series {
    f: u8,
    tag: Uniformizer,
    val: i64,
    prec: i64,
    coeffs: Vec<u8>,
}

impl Series {
    pub fn zero(f: u8, tag: Uniformizer, prec: i64) -> Self {
        Series {
            f,
            tag,
            val: prec,
            prec,
            coeffs: Vec::new(),
        }
    }

    /// Series whose coefficient at exponent `start + i` is `bits[i]`;
    /// exponents at or beyond `prec` are dropped.
    pub fn from_bits(f: u8, tag: Uniformizer, start: i64, bits: &[u8], prec: i64) -> Self {
        let len = (prec - start).max(0) as usize;
        let mask = ((1u16 << f) - 1) as u8;
        let mut coeffs = vec![0u8; len];
        for (slot, b) in coeffs.iter_mut().zip(bits.iter()) {
            *slot = b & mask;
        }
        Series {
            f,
            tag,
            val: start,
            prec,
            coeffs,
        }
        .normalized()
    }

    pub fn from_coeffs(tag: Uniformizer, start: i64, coeffs: &[Fq], prec: i64) -> Self {
        assert!(
            !coeffs.is_empty(),
            "from_coeffs needs at least one coefficient to fix f"
        );
        let f = coeffs[0].degree();
        let bits: Vec<u8> = coeffs.iter().map(|c| c.bits()).collect();
        Series::from_bits(f, tag, start, &bits, prec)
    }

    pub fn monomial(c: Fq, exp: i64, tag: Uniformizer, prec: i64) -> Self {
        Series::from_bits(c.degree(), tag, exp, &[c.bits()], prec)
    }

    pub fn one(f: u8, tag: Uniformizer, prec: i64) -> Self {
        Series::monomial(Fq::one(f), 0, tag, prec)
    }

    /// t^exp with coefficient 1.
    pub fn uniformizer_power(f: u8, tag: Uniformizer, exp: i64, prec: i64) -> Self {
        Series::monomial(Fq::one(f), exp, tag, prec)
    }

    fn normalized(mut self) -> Self {
        match self.coeffs.iter().position(|&c| c != 0) {
            None => {
                self.val = self.prec;
                self.coeffs.clear();
            }
            Some(0) => {}
            Some(i) => {
                self.val += i as i64;
                self.coeffs.drain(..i);
            }
        }
        self
    }

    pub fn degree(&self) -> u8 {
        self.f
    }

    pub fn tag(&self) -> Uniformizer {
        self.tag
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Valuation, or `None` for the zero-to-precision element.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Lower bound for the valuation: the valuation itself, or the
    /// precision for zero.
    pub fn ord_lower_bound(&self) -> i64 {
        self.val
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact valuation, or a precision error when the element is zero to
    /// its precision.
    pub fn ord(&self) -> Result<i64> {
        self.valuation().ok_or_else(|| {
            Error::Precision(format!(
                "valuation of an element that vanishes to precision {}",
                self.prec
            ))
        })
    }

    pub fn leading(&self) -> Option<Fq> {
        self.coeffs.first().map(|&b| Fq::new(self.f, b))
    }

    pub fn coeff(&self, exp: i64) -> Result<Fq> {
        if exp >= self.prec {
            return Err(Error::Precision(format!(
                "coefficient {exp} requested from a series known to precision {}",
                self.prec
            )));
        }
        Ok(Fq::new(self.f, self.raw_coeff(exp)))
    }

    #[inline]
    fn raw_coeff(&self, exp: i64) -> u8 {
        if exp < self.val || exp >= self.prec {
            0
        } else {
            self.coeffs[(exp - self.val) as usize]
        }
    }

    /// Raw coefficient bits for exponents lo..hi.
    pub fn bits_range(&self, lo: i64, hi: i64) -> Result<Vec<u8>> {
        if hi > self.prec {
            return Err(Error::Precision(format!(
                "coefficients up to {hi} requested from a series known to precision {}",
                self.prec
            )));
        }
        Ok((lo..hi).map(|e| self.raw_coeff(e)).collect())
    }

    /// True iff the element is a unit (valuation exactly zero).
    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    /// Lower the precision to `min(prec, n)`.
    pub fn truncate(&self, n: i64) -> Series {
        if n >= self.prec {
            return self.clone();
        }
        let mut out = Series {
            f: self.f,
            tag: self.tag,
            val: self.val.min(n),
            prec: n,
            coeffs: Vec::new(),
        };
        if self.val < n {
            out.coeffs = self.coeffs[..(n - self.val) as usize].to_vec();
            out = out.normalized();
        } else {
            out.val = n;
        }
        out
    }

    /// Reduce to precision exactly `n`; fails if the series is not known
    /// that far.
    pub fn reduce(&self, n: i64) -> Result<Series> {
        if n > self.prec {
            return Err(Error::Precision(format!(
                "reduction modulo t^{n} of a series known to precision {}",
                self.prec
            )));
        }
        Ok(self.truncate(n))
    }

    /// Extend a representative known exactly (a polynomial) to a higher
    /// precision by padding with zeros. Only for canonical representatives.
    pub fn pad_to(&self, n: i64) -> Series {
        if n <= self.prec {
            return self.clone();
        }
        if self.coeffs.is_empty() {
            return Series::zero(self.f, self.tag, n);
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize((n - self.val) as usize, 0);
        Series {
            f: self.f,
            tag: self.tag,
            val: self.val,
            prec: n,
            coeffs,
        }
    }

    /// Multiply by t^k.
    pub fn shift(&self, k: i64) -> Series {
        Series {
            f: self.f,
            tag: self.tag,
            val: self.val + k,
            prec: self.prec + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: Fq) -> Series {
        debug_assert_eq!(c.degree(), self.f);
        if c.is_zero() {
            return Series::zero(self.f, self.tag, self.prec);
        }
        Series {
            f: self.f,
            tag: self.tag,
            val: self.val,
            prec: self.prec,
            coeffs: self
                .coeffs
                .iter()
                .map(|&x| raw_mul(self.f, x, c.bits()))
                .collect(),
        }
    }

    fn check_compatible(&self, other: &Series) {
        assert_eq!(self.f, other.f, "series over different residue fields");
        assert_eq!(self.tag, other.tag, "series in different uniformizers");
    }

    pub fn add(&self, other: &Series) -> Series {
        self.check_compatible(other);
        let prec = self.prec.min(other.prec);
        let lo = self.val.min(other.val);
        if lo >= prec {
            return Series::zero(self.f, self.tag, prec);
        }
        let len = (prec - lo) as usize;
        let mut coeffs = vec![0u8; len];
        for (src_val, src) in [(self.val, &self.coeffs), (other.val, &other.coeffs)] {
            let off = (src_val - lo) as usize;
            for (i, &c) in src.iter().enumerate() {
                let idx = off + i;
                if idx >= len {
                    break;
                }
                coeffs[idx] ^= c;
            }
        }
        Series {
            f: self.f,
            tag: self.tag,
            val: lo,
            prec,
            coeffs,
        }
        .normalized()
    }

    pub fn mul(&self, other: &Series) -> Series {
        self.check_compatible(other);
        let prec = (self.prec + other.val).min(other.prec + self.val);
        let val = self.val + other.val;
        if self.coeffs.is_empty() || other.coeffs.is_empty() || val >= prec {
            return Series::zero(self.f, self.tag, prec);
        }
        let len = (prec - val) as usize;
        let mut coeffs = vec![0u8; len];
        let f = self.f;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if a == 0 {
                continue;
            }
            let row = &super::fq::MUL[f as usize][a as usize];
            for (j, &b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] ^= row[b as usize];
            }
        }
        Series {
            f,
            tag: self.tag,
            val,
            prec,
            coeffs,
        }
        .normalized()
    }

    pub fn inv(&self) -> Result<Series> {
        if self.coeffs.is_empty() {
            return Err(Error::Precision(format!(
                "division by an element that vanishes to precision {} ({self})",
                self.prec
            )));
        }
        let f = self.f;
        let len = self.coeffs.len();
        let c0inv = raw_inv(f, self.coeffs[0]);
        let mut w = vec![0u8; len];
        w[0] = c0inv;
        for i in 1..len {
            let mut s = 0u8;
            for j in 1..=i {
                s ^= raw_mul(f, self.coeffs[j], w[i - j]);
            }
            w[i] = raw_mul(f, c0inv, s);
        }
        Ok(Series {
            f,
            tag: self.tag,
            val: -self.val,
            prec: -self.val + len as i64,
            coeffs: w,
        })
    }

    pub fn div(&self, other: &Series) -> Result<Series> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Series> {
        if e == 0 {
            return Ok(Series::one(self.f, self.tag, (self.prec - self.val).max(0)));
        }
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc: Option<Series> = None;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(acc.expect("nonzero exponent"))
    }

    /// Congruence modulo t^n. Both operands must be known to precision n.
    pub fn eq_mod(&self, other: &Series, n: i64) -> Result<bool> {
        if self.prec < n || other.prec < n {
            return Err(Error::Precision(format!(
                "congruence modulo t^{n} with operands known to {} and {}",
                self.prec, other.prec
            )));
        }
        let lo = self.val.min(other.val);
        Ok((lo..n).all(|e| self.raw_coeff(e) == other.raw_coeff(e)))
    }

    /// True iff ord >= k, with an error if the precision does not decide.
    pub fn ord_at_least(&self, k: i64) -> Result<bool> {
        if self.val < self.prec && !self.coeffs.is_empty() {
            return Ok(self.val >= k);
        }
        if self.prec >= k {
            Ok(true)
        } else {
            Err(Error::Precision(format!(
                "deciding ord >= {k} for an element known only to precision {}",
                self.prec
            )))
        }
    }

    /// Reinterpret the coefficients with respect to another uniformizer.
    pub fn retag(&self, tag: Uniformizer) -> Series {
        let mut s = self.clone();
        s.tag = tag;
        s
    }

    /// Compact coefficient string for exponents lo..hi, e.g. `0101`.
    pub fn coeff_string(&self, lo: i64, hi: i64) -> String {
        (lo..hi)
            .map(|e| format!("{:x}", self.raw_coeff(e)))
            .collect()
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.tag.symbol();
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = self.val + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coef = if c == 1 && e != 0 {
                String::new()
            } else {
                format!("{c:x}")
            };
            match e {
                0 => write!(f, "{c:x}")?,
                1 => write!(f, "{coef}{t}")?,
                _ => write!(f, "{coef}{t}^{e}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({t}^{})", self.prec)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        Series::add(self, rhs)
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        Series::add(self, rhs)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        Series::mul(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    const P: Uniformizer = Uniformizer::Pi;

    fn pi(prec: i64) -> Series {
        Series::uniformizer_power(1, P, 1, prec)
    }

    #[test]
    fn basic_examples() {
        let x = pi(10);
        assert!(x.add(&x).is_zero());
        assert_eq!(x.add(&x).precision(), 10);
        let sq = x.mul(&x);
        assert_eq!(sq.valuation(), Some(2));
        assert_eq!(sq.leading(), Some(Fq::one(1)));
        let one = Series::one(1, P, 10);
        let onep = one.add(&x);
        let q = one.div(&onep).unwrap();
        for e in 0..10 {
            assert_eq!(q.coeff(e).unwrap(), Fq::one(1));
        }
        assert!(q.mul(&onep).eq_mod(&one, 10).unwrap());
    }

    #[test]
    fn eq_mod_examples() {
        let x = Series::from_bits(1, P, 0, &[1, 0, 0, 1], 20);
        let one = Series::one(1, P, 20);
        assert!(x.eq_mod(&one, 3).unwrap());
        assert!(!x.eq_mod(&one, 4).unwrap());
        assert!(x.eq_mod(&one, 25).is_err());
    }

    #[test]
    fn precision_rules() {
        let a = Series::from_bits(1, P, -2, &[1, 1], 8);
        let b = Series::from_bits(1, P, 3, &[1], 6);
        let p = a.mul(&b);
        assert_eq!(p.precision(), 6 - 2);
        assert_eq!(p.valuation(), Some(1));
        let zero = Series::zero(1, P, 5);
        assert!(zero.inv().is_err());
        let inv = a.inv().unwrap();
        assert_eq!(inv.valuation(), Some(2));
        assert_eq!(inv.precision(), 8 + 4);
    }

    #[test]
    fn pow_and_negative_pow() {
        let x = Series::from_bits(2, P, 1, &[2, 3, 1], 12);
        let x3 = x.pow(3).unwrap();
        let direct = x.mul(&x).mul(&x);
        assert!(x3
            .eq_mod(&direct, x3.precision().min(direct.precision()))
            .unwrap());
        let xm2 = x.pow(-2).unwrap();
        let back = xm2.mul(&x.mul(&x));
        assert!(back
            .eq_mod(&Series::one(2, P, 30), back.precision())
            .unwrap());
    }
}
