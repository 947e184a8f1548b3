//! 2x2 matrices over E, root subgroups, the embedding iota, the Weyl
//! lifts, congruence subgroups and double-coset membership.

use crate::algebra::Series;
use crate::error::{Error, Result};
use crate::tower::Tower;
use std::fmt;

#[derive(Clone, Debug)]
pub struct Mat2 {
    pub e11: Series,
    pub e12: Series,
    pub e21: Series,
    pub e22: Series,
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.e11, self.e12, self.e21, self.e22
        )
    }
}

impl Mat2 {
    pub fn new(e11: Series, e12: Series, e21: Series, e22: Series) -> Self {
        Mat2 { e11, e12, e21, e22 }
    }

    pub fn identity(t: &Tower) -> Self {
        Mat2::new(t.one(), t.zero(), t.zero(), t.one())
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            e11: self.e11.mul(&o.e11).add(&self.e12.mul(&o.e21)),
            e12: self.e11.mul(&o.e12).add(&self.e12.mul(&o.e22)),
            e21: self.e21.mul(&o.e11).add(&self.e22.mul(&o.e21)),
            e22: self.e21.mul(&o.e12).add(&self.e22.mul(&o.e22)),
        }
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            e11: self.e11.add(&o.e11),
            e12: self.e12.add(&o.e12),
            e21: self.e21.add(&o.e21),
            e22: self.e22.add(&o.e22),
        }
    }

    pub fn scale(&self, s: &Series) -> Mat2 {
        Mat2 {
            e11: self.e11.mul(s),
            e12: self.e12.mul(s),
            e21: self.e21.mul(s),
            e22: self.e22.mul(s),
        }
    }

    pub fn det(&self) -> Series {
        self.e11.mul(&self.e22).add(&self.e12.mul(&self.e21))
    }

    pub fn trace(&self) -> Series {
        self.e11.add(&self.e22)
    }

    pub fn inv(&self) -> Result<Mat2> {
        let dinv = self
            .det()
            .inv()
            .map_err(|_| Error::Domain("matrix is not invertible to the known precision".into()))?;
        Ok(Mat2 {
            e11: self.e22.mul(&dinv),
            e12: self.e12.mul(&dinv),
            e21: self.e21.mul(&dinv),
            e22: self.e11.mul(&dinv),
        })
    }

    pub fn tau(&self, t: &Tower) -> Mat2 {
        Mat2 {
            e11: t.tau(&self.e11),
            e12: t.tau(&self.e12),
            e21: t.tau(&self.e21),
            e22: t.tau(&self.e22),
        }
    }

    pub fn entries(&self) -> [&Series; 4] {
        [&self.e11, &self.e12, &self.e21, &self.e22]
    }

    pub fn min_precision(&self) -> i64 {
        self.entries().iter().map(|e| e.precision()).min().unwrap()
    }

    /// Entrywise congruence modulo pi^n.
    pub fn eq_mod(&self, o: &Mat2, n: i64) -> Result<bool> {
        for (a, b) in self.entries().iter().zip(o.entries().iter()) {
            if !a.eq_mod(b, n)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// X - 1 (equal to X + 1 in characteristic 2).
    pub fn minus_identity(&self, t: &Tower) -> Mat2 {
        self.add(&Mat2::identity(t))
    }
}

pub fn e_plus(t: &Tower, b: &Series) -> Mat2 {
    Mat2::new(t.one(), b.clone(), t.zero(), t.one())
}

pub fn e_minus(t: &Tower, a: &Series) -> Mat2 {
    Mat2::new(t.one(), t.zero(), a.clone(), t.one())
}

pub fn e_zero(t: &Tower, c: &Series, d: &Series) -> Mat2 {
    Mat2::new(c.clone(), t.zero(), t.zero(), d.clone())
}

pub fn antidiag(t: &Tower, a: &Series, b: &Series) -> Mat2 {
    Mat2::new(t.zero(), a.clone(), b.clone(), t.zero())
}

/// The image of x0 + pi*x1 under the regular representation on the
/// F-basis (1, pi) of E.
pub fn iota(t: &Tower, x: &Series) -> Result<Mat2> {
    let (x0, x1) = t.split(x)?;
    Ok(iota_parts(t, &x0, &x1))
}

pub fn iota_parts(t: &Tower, x0: &Series, x1: &Series) -> Mat2 {
    Mat2::new(
        x0.add(&t.delta.mul(x1)),
        x1.clone(),
        t.varpi.mul(x1),
        x0.clone(),
    )
}

pub fn iota_pi(t: &Tower) -> Mat2 {
    Mat2::new(t.delta.clone(), t.one(), t.varpi.clone(), t.zero())
}

/// The lift of the affine Weyl element w:
/// antidiag(pi^-n, pi^n) * diag(eps^floor(n/2), eps^-floor((n+1)/2)).
pub fn wdot(t: &Tower) -> Mat2 {
    let n = t.n;
    let a = t.eps.pow(n / 2).expect("eps is a unit");
    let b = t.eps.pow(-((n + 1) / 2)).expect("eps is a unit");
    antidiag(t, &t.pi_pow(-n), &t.pi_pow(n)).mul(&e_zero(t, &a, &b))
}

/// Exponents (s, r) with vdot = antidiag(pi^-s, pi^r).
pub fn vdot_exponents(t: &Tower) -> (i64, i64) {
    let h = t.half();
    (h + (t.n + 1) / 2, h + t.n / 2)
}

pub fn vdot(t: &Tower) -> Mat2 {
    let (s, r) = vdot_exponents(t);
    antidiag(t, &t.pi_pow(-s), &t.pi_pow(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldTag {
    F,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CongruenceLevel {
    pub field: FieldTag,
    pub r: i64,
}

impl CongruenceLevel {
    pub fn f(r: i64) -> Self {
        CongruenceLevel {
            field: FieldTag::F,
            r,
        }
    }

    pub fn e(r: i64) -> Self {
        CongruenceLevel {
            field: FieldTag::E,
            r,
        }
    }

    /// Required valuations (diagonal - 1, upper, lower) in the field's own
    /// valuation.
    pub fn bounds(&self) -> (i64, i64, i64) {
        let r = self.r;
        ((r + 1).div_euclid(2), r.div_euclid(2), r.div_euclid(2) + 1)
    }
}

/// Membership in I_F^r or I_E^r, decided entrywise; elements of F are
/// pi-series so F-valuations are doubled.
pub fn in_level(g: &Mat2, level: CongruenceLevel, t: &Tower) -> Result<bool> {
    let (dg, up, lo) = level.bounds();
    let scale = match level.field {
        FieldTag::F => 2,
        FieldTag::E => 1,
    };
    if level.r == 0 {
        // I_L itself: integral, upper triangular mod p, units on the diagonal
        let ok = g.e11.is_unit()
            && g.e22.is_unit()
            && g.e12.ord_at_least(0)?
            && g.e21.ord_at_least(scale)?;
        return Ok(ok);
    }
    let one = t.one();
    Ok(g.e11.add(&one).ord_at_least(scale * dg)?
        && g.e22.add(&one).ord_at_least(scale * dg)?
        && g.e12.ord_at_least(scale * up)?
        && g.e21.ord_at_least(scale * lo)?)
}

/// Gauss factorization h = e_-(c) e_0(u, v) e_+(b).
pub fn gauss_factor(h: &Mat2) -> Result<(Series, Series, Series, Series)> {
    if !h.e11.is_unit() && h.e11.valuation().is_none() {
        return Err(Error::Domain(
            "Gauss factorization needs h11 nonzero".into(),
        ));
    }
    let u = h.e11.clone();
    let uinv = u.inv()?;
    let b = h.e12.mul(&uinv);
    let c = h.e21.mul(&uinv);
    let v = h.e22.add(&c.mul(&u).mul(&b));
    Ok((c, u, v, b))
}

/// g in J wdot J with J = I_E^{2m+1}.
///
/// Conjugation by wdot maps J to (1+p^{m+1}, p^{m+1-2n}; p^{m+2n},
/// 1+p^{m+1}), and m+1-2n = d. The product of that group with J is the
/// group (1+p^{m+1}, p^d; p^{m+1}, 1+p^{m+1}), so membership reduces to a
/// range test on the Gauss parameters of wdot^-1 g.
pub fn double_coset_member(t: &Tower, g: &Mat2) -> Result<bool> {
    let m = t.m;
    let h = wdot(t).inv()?.mul(g);
    if !h.e11.is_unit() {
        if h.e11.precision() <= 0 {
            return Err(Error::Precision("entry h11 is not known".into()));
        }
        return Ok(false);
    }
    let (c, u, v, b) = gauss_factor(&h)?;
    let one = t.one();
    Ok(u.add(&one).ord_at_least(m + 1)?
        && v.add(&one).ord_at_least(m + 1)?
        && b.ord_at_least(t.d)?
        && c.ord_at_least(m + 1)?)
}

/// Decide h in iota(E^x) I_F^r and return (e, j) with h = iota(e) j.
pub fn factor_e_times_level(t: &Tower, h: &Mat2, r: i64) -> Result<Option<(Series, Mat2)>> {
    // bottom row of iota(x0 + pi x1) is (w x1, x0)
    let x1 = h.e21.div(&t.varpi)?;
    let e = h.e22.add(&x1.shift(1));
    if e.is_zero() {
        return Ok(None);
    }
    let j = iota(t, &e)?.inv()?.mul(h);
    if in_level(&j, CongruenceLevel::f(r), t)? {
        Ok(Some((e, j)))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerParams;

    fn tower(f: u8, d: i64, n: i64) -> Tower {
        Tower::build(&TowerParams::new(f, d, n)).unwrap()
    }

    #[test]
    fn iota_of_pi_and_minimal_polynomial() {
        let t = tower(1, 1, 1);
        let ip = iota(&t, &t.pi_pow(1)).unwrap();
        assert!(ip.eq_mod(&iota_pi(&t), t.work() - 4).unwrap());
        assert!(ip.det().eq_mod(&t.varpi, t.work() - 4).unwrap());
        let lhs = ip
            .mul(&ip)
            .add(&ip.scale(&t.delta))
            .add(&Mat2::identity(&t).scale(&t.varpi));
        let zero = Mat2::new(t.zero(), t.zero(), t.zero(), t.zero());
        assert!(lhs.eq_mod(&zero, t.work() - 4).unwrap());
    }

    #[test]
    fn level_membership_examples() {
        let t = tower(1, 1, 1);
        let m = t.m;
        let j = CongruenceLevel::e(2 * m + 1);
        assert!(in_level(&e_minus(&t, &t.pi_pow(m + 1)), j, &t).unwrap());
        assert!(!in_level(&e_minus(&t, &t.pi_pow(m)), j, &t).unwrap());
        assert!(in_level(&Mat2::identity(&t), j, &t).unwrap());
    }

    #[test]
    fn wdot_and_vdot_shapes() {
        let t = tower(1, 1, 1);
        assert_eq!(vdot_exponents(&t), (2, 1));
        assert_eq!(wdot(&t).det().valuation(), Some(0));
        assert!(double_coset_member(&t, &wdot(&t)).unwrap());
        let g = e_minus(&t, &t.pi_pow(t.m)).mul(&wdot(&t));
        assert!(!double_coset_member(&t, &g).unwrap());
    }

    #[test]
    fn factor_examples() {
        let t = tower(1, 1, 1);
        let (e, j) = factor_e_times_level(&t, &iota_pi(&t), t.n + t.d)
            .unwrap()
            .unwrap();
        assert!(e.eq_mod(&t.pi_pow(1), 6).unwrap());
        assert!(j.eq_mod(&Mat2::identity(&t), 6).unwrap());
        let h = e_minus(&t, &t.varpi);
        assert!(factor_e_times_level(&t, &h, t.n + t.d).unwrap().is_none());
    }
}
