//! Exact elements of Z[zeta_M], stored as coefficient vectors reduced
//! modulo the cyclotomic polynomial.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

struct CyclotomicData {
    degree: usize,
    /// x^j mod Phi_M for 0 <= j < M
    powers: Vec<Vec<i64>>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both in ascending order, den monic
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let qn = r.len() - 1 - dn;
    let mut q = vec![0i64; qn + 1];
    for k in (0..=qn).rev() {
        let c = r[k + dn];
        q[k] = c;
        for (i, &dc) in den.iter().enumerate() {
            r[k + i] -= c * dc;
        }
    }
    debug_assert!(r.iter().all(|&c| c == 0));
    q
}

fn cyclotomic_poly(m: u64, cache: &mut HashMap<u64, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = cache.get(&m) {
        return p.clone();
    }
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            let p = cyclotomic_poly(d, cache);
            num = poly_div_exact(&num, &p);
        }
    }
    cache.insert(m, num.clone());
    num
}

fn data(m: u64) -> Arc<CyclotomicData> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CyclotomicData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("cyclotomic cache poisoned");
    if let Some(d) = guard.get(&m) {
        return d.clone();
    }
    let mut pc = HashMap::new();
    let phi = cyclotomic_poly(m, &mut pc);
    let degree = phi.len() - 1;
    let mut powers = Vec::with_capacity(m as usize);
    let mut cur = vec![0i64; degree];
    if degree > 0 {
        cur[0] = 1;
    }
    for _ in 0..m {
        powers.push(cur.clone());
        // multiply by x and reduce
        let top = if degree > 0 { cur[degree - 1] } else { 0 };
        let mut next = vec![0i64; degree];
        for i in (1..degree).rev() {
            next[i] = cur[i - 1];
        }
        for i in 0..degree {
            next[i] -= top * phi[i];
        }
        cur = next;
    }
    let d = Arc::new(CyclotomicData { degree, powers });
    guard.insert(m, d.clone());
    d
}

/// Euler's totient, the degree of Phi_M.
pub fn totient(m: u64) -> usize {
    data(m).degree
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<BigInt>,
}

impl Cyclotomic {
    pub fn zero(m: u64) -> Self {
        Cyclotomic {
            order: m,
            coeffs: vec![BigInt::zero(); data(m).degree],
        }
    }

    pub fn from_int(m: u64, k: i64) -> Self {
        let mut z = Cyclotomic::zero(m);
        z.coeffs[0] = BigInt::from(k);
        z
    }

    pub fn one(m: u64) -> Self {
        Cyclotomic::from_int(m, 1)
    }

    /// zeta_M^j.
    pub fn zeta_pow(m: u64, j: i64) -> Self {
        let mut counts = vec![0i64; m as usize];
        counts[j.rem_euclid(m as i64) as usize] = 1;
        Cyclotomic::from_exponent_counts(m, &counts)
    }

    /// Sum of counts[j] * zeta_M^j.
    pub fn from_exponent_counts(m: u64, counts: &[i64]) -> Self {
        let dat = data(m);
        let mut acc = vec![0i128; dat.degree];
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (a, &p) in acc.iter_mut().zip(dat.powers[j].iter()) {
                *a += c as i128 * p as i128;
            }
        }
        Cyclotomic {
            order: m,
            coeffs: acc.into_iter().map(BigInt::from).collect(),
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn same_order(&self, o: &Cyclotomic) {
        assert_eq!(self.order, o.order, "cyclotomic values of different orders");
    }

    pub fn add(&self, o: &Cyclotomic) -> Cyclotomic {
        self.same_order(o);
        Cyclotomic {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &Cyclotomic) -> Cyclotomic {
        self.same_order(o);
        Cyclotomic {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }

    pub fn mul(&self, o: &Cyclotomic) -> Cyclotomic {
        self.same_order(o);
        let dat = data(self.order);
        let deg = dat.degree;
        let m = self.order as usize;
        let mut out = vec![BigInt::zero(); deg];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a * b;
                for (slot, &p) in out.iter_mut().zip(dat.powers[(i + j) % m].iter()) {
                    if p != 0 {
                        *slot += &prod * p;
                    }
                }
            }
        }
        Cyclotomic {
            order: self.order,
            coeffs: out,
        }
    }

    /// The same number in Z[zeta_L] for a multiple L of the order.
    pub fn embed(&self, new_order: u64) -> Result<Cyclotomic> {
        if !new_order.is_multiple_of(self.order) {
            return Err(Error::Consistency(format!(
                "Z[zeta_{}] does not embed in Z[zeta_{new_order}]",
                self.order
            )));
        }
        let s = (new_order / self.order) as i64;
        let mut out = Cyclotomic::zero(new_order);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&Cyclotomic::zeta_pow(new_order, i as i64 * s).scale(c));
            }
        }
        Ok(out)
    }

    /// Complex conjugation zeta -> zeta^{-1}.
    pub fn conj(&self) -> Cyclotomic {
        let dat = data(self.order);
        let m = self.order as usize;
        let mut out = vec![BigInt::zero(); dat.degree];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let j = (m - i % m) % m;
            for (slot, &p) in out.iter_mut().zip(dat.powers[j].iter()) {
                if p != 0 {
                    *slot += a * p;
                }
            }
        }
        Cyclotomic {
            order: self.order,
            coeffs: out,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational integer value, if the element lies in Z.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Exact division by an integer; fails unless every coefficient is
    /// divisible.
    pub fn div_exact(&self, k: &BigInt) -> Result<Cyclotomic> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return Err(Error::Consistency(format!(
                    "{self} is not divisible by {k} in Z[zeta_{}]",
                    self.order
                )));
            }
            out.push(q);
        }
        Ok(Cyclotomic {
            order: self.order,
            coeffs: out,
        })
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if i == 1 {
                        write!(f, "z{}", self.order)?
                    } else {
                        write!(f, "z{}^{i}", self.order)?
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees() {
        for (m, phi) in [
            (1, 1),
            (2, 1),
            (4, 2),
            (8, 4),
            (12, 4),
            (15, 8),
            (16, 8),
            (60, 16),
        ] {
            assert_eq!(totient(m), phi);
        }
    }

    #[test]
    fn zeta_relations() {
        for m in [1u64, 2, 3, 4, 6, 8, 12, 24, 30] {
            let z = Cyclotomic::zeta_pow(m, 1);
            let mut acc = Cyclotomic::one(m);
            let mut sum = Cyclotomic::zero(m);
            for _ in 0..m {
                sum = sum.add(&acc);
                acc = acc.mul(&z);
            }
            assert_eq!(acc, Cyclotomic::one(m));
            if m > 1 {
                assert!(sum.is_zero());
            }
            assert_eq!(z.mul(&z.conj()), Cyclotomic::one(m));
        }
    }

    #[test]
    fn exact_division() {
        let x = Cyclotomic::from_int(8, 6).add(&Cyclotomic::zeta_pow(8, 3).scale(&BigInt::from(4)));
        assert!(x.div_exact(&BigInt::from(2)).is_ok());
        assert!(x.div_exact(&BigInt::from(4)).is_err());
    }
}
