//! The group acting on the right of the point set, its abelianization and
//! the push-out group isomorphic to it.
//!
//! Elements i(t, r) are stored in normal form; the matrix realization is
//! used for products in the non-abelian group and as a cross-check.

use crate::algebra::Series;
use crate::error::{Error, Result};
use crate::gl2::{e_minus, e_plus, e_zero, in_level, CongruenceLevel, Mat2};
use crate::tower::{AddClass, EStarClass, Tower, UnitClass};
use std::fmt;

/// The element i(t, r), t in E^x/U^{m+1}, r in O/p^m.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GammaElem {
    pub t: EStarClass,
    pub r: AddClass,
}

/// The element i(t, rbar) of the abelianization, rbar in O/p^d.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GammaBarElem {
    pub t: EStarClass,
    pub rbar: AddClass,
}

/// A class (x, y) of the push-out, y in p^n/p^{m+1} supported in degrees
/// n..n+d-1 after canonicalization.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PiElem {
    pub x: EStarClass,
    pub y: AddClass,
}

impl fmt::Debug for GammaElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i({:?}, {:?})", self.t, self.r)
    }
}

impl fmt::Debug for GammaBarElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i({:?}, {:?})", self.t, self.rbar)
    }
}

impl fmt::Debug for PiElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

/// P_r = 1 + eps^n pi^{2n} r tau(r).
pub fn p_r(t: &Tower, r: &Series) -> Series {
    let en = t.eps.pow(t.n).expect("unit");
    t.one().add(&en.mul(&r.mul(&t.tau(r))).shift(2 * t.n))
}

/// Matrix e_+(r) e_-(eps^n pi^{2n} tau(r) P_r^{-1}) e_0(t, tau(t) P_r^{-1}).
pub fn gamma_matrix_raw(tw: &Tower, t: &Series, r: &Series) -> Mat2 {
    let pinv = p_r(tw, r).inv().expect("P_r is a unit");
    let en = tw.eps.pow(tw.n).expect("unit");
    let lower = en.mul(&tw.tau(r)).mul(&pinv).shift(2 * tw.n);
    e_plus(tw, r)
        .mul(&e_minus(tw, &lower))
        .mul(&e_zero(tw, t, &tw.tau(t).mul(&pinv)))
}

impl GammaElem {
    pub fn new(tw: &Tower, t: &Series, r: &Series) -> Result<Self> {
        Ok(GammaElem {
            t: EStarClass::new(t, tw.m + 1)?,
            r: AddClass::new(r, 0, tw.m)?,
        })
    }

    pub fn identity(tw: &Tower) -> Self {
        GammaElem {
            t: EStarClass::one(tw.f, tw.m + 1),
            r: AddClass::zero(tw.f, 0, tw.m),
        }
    }

    pub fn matrix(&self, tw: &Tower) -> Mat2 {
        gamma_matrix_raw(tw, &self.t.lift(tw.work()), &self.r.lift(tw.work()))
    }

    /// Read (t, r) off a matrix congruent to some i(t, r) modulo I_E^{2m+1}.
    pub fn from_matrix(tw: &Tower, g: &Mat2) -> Result<Self> {
        let r = g.e12.div(&g.e22)?;
        let t = g.e11.add(&r.mul(&g.e21));
        let elem = GammaElem::new(tw, &t, &r)
            .map_err(|e| Error::Closure(format!("matrix is not of the form i(t, r): {e}")))?;
        let check = g.inv()?.mul(&elem.matrix(tw));
        if !in_level(&check, CongruenceLevel::e(2 * tw.m + 1), tw)? {
            return Err(Error::Closure(
                "matrix is not congruent to i(t, r) modulo I_E^{2m+1}".into(),
            ));
        }
        Ok(elem)
    }

    pub fn mul(&self, o: &GammaElem, tw: &Tower) -> Result<GammaElem> {
        GammaElem::from_matrix(tw, &self.matrix(tw).mul(&o.matrix(tw)))
    }

    pub fn inv(&self, tw: &Tower) -> Result<GammaElem> {
        GammaElem::from_matrix(tw, &self.matrix(tw).inv()?)
    }

    /// Image in the abelianization.
    pub fn reduce(&self, tw: &Tower) -> GammaBarElem {
        GammaBarElem {
            t: self.t.clone(),
            rbar: AddClass::new(self.r.rep(), 0, tw.d).expect("d <= m"),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.t.v == 0
    }
}

impl GammaBarElem {
    pub fn new(tw: &Tower, t: &Series, rbar: &Series) -> Result<Self> {
        Ok(GammaBarElem {
            t: EStarClass::new(t, tw.m + 1)?,
            rbar: AddClass::new(rbar, 0, tw.d)?,
        })
    }

    pub fn identity(tw: &Tower) -> Self {
        GammaBarElem {
            t: EStarClass::one(tw.f, tw.m + 1),
            rbar: AddClass::zero(tw.f, 0, tw.d),
        }
    }

    /// i(pi, 0).
    pub fn pi(tw: &Tower) -> Self {
        GammaBarElem {
            t: EStarClass {
                v: 1,
                u: UnitClass::one(tw.f, tw.m + 1),
            },
            rbar: AddClass::zero(tw.f, 0, tw.d),
        }
    }

    /// i(t,r) i(t',u) = i(t t' (1 + pi^{2n} r u), r + u).
    pub fn mul(&self, o: &GammaBarElem, tw: &Tower) -> GammaBarElem {
        let ru = self.rbar.rep().mul(o.rbar.rep());
        let corr = tw.one().add(&ru.shift(2 * tw.n));
        let corr = EStarClass::new(&corr, tw.m + 1).expect("unit");
        GammaBarElem {
            t: self.t.mul(&o.t).mul(&corr),
            rbar: self.rbar.add(&o.rbar),
        }
    }

    pub fn pow(&self, e: i64, tw: &Tower) -> GammaBarElem {
        let base = if e < 0 { self.inv(tw) } else { self.clone() };
        let mut acc = GammaBarElem::identity(tw);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base, tw);
        }
        acc
    }

    pub fn inv(&self, tw: &Tower) -> GammaBarElem {
        // i(t, r)^{-1} = i(t^{-1} (1 + pi^{2n} r^2)^{-1}, r) in char 2
        let rr = self.rbar.rep().mul(self.rbar.rep());
        let corr = tw.one().add(&rr.shift(2 * tw.n));
        let corr = EStarClass::new(&corr, tw.m + 1).expect("unit");
        GammaBarElem {
            t: self.t.mul(&corr).inv(),
            rbar: self.rbar.clone(),
        }
    }

    /// Split off the free part: (k, torsion) with self = i(pi,0)^k * torsion.
    pub fn split_free(&self) -> (i64, GammaBarElem) {
        let k = self.t.v;
        let tors = GammaBarElem {
            t: EStarClass::from_unit(self.t.u.clone()),
            rbar: self.rbar.clone(),
        };
        (k, tors)
    }

    /// A matrix lift i(t, r) with r the canonical lift of rbar.
    pub fn lift(&self, tw: &Tower) -> GammaElem {
        GammaElem {
            t: self.t.clone(),
            r: AddClass::new(&self.rbar.lift(tw.m), 0, tw.m).expect("lift"),
        }
    }
}

impl PiElem {
    /// Canonical form: move the p^{n+d} part z of y into x(1+z).
    pub fn new(tw: &Tower, x: &Series, y: &Series) -> Result<Self> {
        let (n, d, m) = (tw.n, tw.d, tw.m);
        let yc = AddClass::new(y, n, m + 1)?;
        let low_bits = yc.rep().bits_range(n, n + d)?;
        let low = Series::from_bits(tw.f, crate::algebra::Uniformizer::Pi, n, &low_bits, m + 1);
        let z = yc.rep().add(&low);
        let x = x.mul(&tw.one().add(&z));
        Ok(PiElem {
            x: EStarClass::new(&x, m + 1)?,
            y: AddClass::new(&low, n, m + 1)?,
        })
    }

    pub fn identity(tw: &Tower) -> Self {
        PiElem {
            x: EStarClass::one(tw.f, tw.m + 1),
            y: AddClass::zero(tw.f, tw.n, tw.m + 1),
        }
    }

    pub fn mul(&self, o: &PiElem, tw: &Tower) -> PiElem {
        let p = tw.work();
        let x = self.x.mul(&o.x).lift(p);
        let y = self.y.add(&o.y);
        PiElem::new(tw, &x, &y.lift(p)).expect("closed under the law")
    }
}

/// beta(x, y) = i(x (1+y)^{-1}, pi^{-n} y (1 + ybar)^{-1} mod p^d).
pub fn beta_iso(tw: &Tower, p: &PiElem) -> GammaBarElem {
    let w = tw.work();
    let y = p.y.lift(w);
    let x = p.x.lift(w);
    let one = tw.one();
    let t = x.mul(&one.add(&y).inv().expect("unit"));
    let ybar = y.truncate(tw.d);
    let r = y.shift(-tw.n).mul(&one.add(&ybar).inv().expect("unit"));
    GammaBarElem::new(tw, &t, &r.pad_to(tw.d).truncate(tw.d)).expect("well-formed image")
}

pub fn beta_inv(tw: &Tower, g: &GammaBarElem) -> PiElem {
    let w = tw.work();
    let r = g.rbar.lift(w);
    // solve r = y0 (1 + pi^n y0)^{-1} mod p^d for y0 = pi^{-n} y
    let one = tw.one();
    let y0 = r
        .mul(&one.add(&r.shift(tw.n)).inv().expect("unit"))
        .truncate(tw.d);
    let y = y0.pad_to(w).shift(tw.n);
    let x = g.t.lift(w).mul(&one.add(&y));
    PiElem::new(tw, &x, &y).expect("well-formed preimage")
}

/// i_x = i((1 + pi^n eps^{(d+1)/2} x)^{-1}, x (1 + pi^n x)^{-1} mod p^d).
pub fn splitting_ix(tw: &Tower, x: &AddClass) -> GammaBarElem {
    let w = tw.work();
    let xs = x.lift(w);
    let one = tw.one();
    let eh = tw.eps.pow(tw.half()).expect("unit");
    let t = one.add(&eh.mul(&xs).shift(tw.n)).inv().expect("unit");
    let r = xs.mul(&one.add(&xs.shift(tw.n)).inv().expect("unit"));
    GammaBarElem::new(tw, &t, &r).expect("well-formed")
}

/// All elements of the torsion part Gamma/Gamma' in a fixed order.
pub fn enumerate_torsion(tw: &Tower) -> Vec<GammaBarElem> {
    let units = UnitClass::enumerate(tw.f, tw.m + 1);
    let rs = AddClass::enumerate(tw.f, 0, tw.d);
    let mut out = Vec::with_capacity(units.len() * rs.len());
    for u in &units {
        for r in &rs {
            out.push(GammaBarElem {
                t: EStarClass::from_unit(u.clone()),
                rbar: r.clone(),
            });
        }
    }
    out
}

/// All elements of Gamma (t a unit) in a fixed order.
pub fn enumerate_gamma(tw: &Tower) -> Vec<GammaElem> {
    let units = UnitClass::enumerate(tw.f, tw.m + 1);
    let rs = AddClass::enumerate(tw.f, 0, tw.m);
    let mut out = Vec::with_capacity(units.len() * rs.len());
    for u in &units {
        for r in &rs {
            out.push(GammaElem {
                t: EStarClass::from_unit(u.clone()),
                r: r.clone(),
            });
        }
    }
    out
}

/// All canonical elements of the torsion part of the push-out.
pub fn enumerate_pi_torsion(tw: &Tower) -> Vec<PiElem> {
    let units = UnitClass::enumerate(tw.f, tw.m + 1);
    let ys = AddClass::enumerate(tw.f, tw.n, tw.n + tw.d);
    let mut out = Vec::new();
    for u in &units {
        for y in &ys {
            out.push(PiElem {
                x: EStarClass::from_unit(u.clone()),
                y: AddClass::new(&y.lift(tw.m + 1), tw.n, tw.m + 1).expect("in range"),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerParams;

    fn tower(f: u8, d: i64, n: i64) -> Tower {
        Tower::build(&TowerParams::new(f, d, n)).unwrap()
    }

    #[test]
    fn torsion_order_at_smallest_parameters() {
        let t = tower(1, 1, 1);
        assert_eq!(enumerate_torsion(&t).len(), 8);
        assert_eq!(enumerate_gamma(&t).len(), 16);
    }

    #[test]
    fn identity_elements() {
        let t = tower(1, 1, 1);
        let id = GammaElem::identity(&t);
        for g in enumerate_gamma(&t) {
            assert_eq!(id.mul(&g, &t).unwrap(), g);
        }
        let p = PiElem::identity(&t);
        assert_eq!(beta_iso(&t, &p), GammaBarElem::identity(&t));
        let x0 = AddClass::zero(t.f, 0, t.n + t.d);
        assert_eq!(splitting_ix(&t, &x0), GammaBarElem::identity(&t));
    }

    #[test]
    fn beta_of_pi() {
        let t = tower(1, 1, 1);
        let p = PiElem::new(&t, &t.pi_pow(1), &t.zero()).unwrap();
        assert_eq!(beta_iso(&t, &p), GammaBarElem::pi(&t));
    }
}
