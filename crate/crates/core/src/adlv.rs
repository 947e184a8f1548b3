//! The finite point set X in coordinates (a, C), its independent
//! verification, and the left, right and twisted actions on it.

use crate::algebra::Series;
use crate::error::{Error, Result};
use crate::gl2::{
    double_coset_member, e_minus, e_zero, in_level, iota, iota_pi, vdot, vdot_exponents,
    CongruenceLevel, Mat2,
};
use crate::groups::{enumerate_gamma, GammaElem};
use crate::tower::{AddClass, Tower, UnitClass};
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;

/// A point x(a, C): a in (p/p^{n+d+m+1})*, C in U/U^{m+1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AdlvPoint {
    pub a: AddClass,
    pub c: UnitClass,
}

pub type PointKey = (u128, u128);

impl fmt::Debug for AdlvPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x({:?}, {:?})", self.a, self.c)
    }
}

/// Modulus of the a-coordinate.
pub fn a_modulus(tw: &Tower) -> i64 {
    tw.n + tw.d + tw.m + 1
}

impl AdlvPoint {
    pub fn new(tw: &Tower, a: &Series, c: &Series) -> Result<Self> {
        let a = AddClass::new(a, 1, a_modulus(tw))?;
        if !a.is_primitive() {
            return Err(Error::Domain(
                "the a-coordinate must have valuation exactly 1".into(),
            ));
        }
        Ok(AdlvPoint {
            a,
            c: UnitClass::new(c, tw.m + 1)?,
        })
    }

    pub fn key(&self) -> PointKey {
        (self.a.key(), self.c.key())
    }

    pub fn a_lift(&self, tw: &Tower) -> Series {
        self.a.lift(tw.work())
    }

    pub fn c_lift(&self, tw: &Tower) -> Series {
        self.c.lift(tw.work())
    }

    /// R = pi^{-(d+1)} (tau(a) + a).
    pub fn r(&self, tw: &Tower) -> Series {
        tw.r_of(&self.a_lift(tw))
    }

    /// D = eps^{(d+1)/2} tau(C) R^{-1}.
    pub fn d_coord(&self, tw: &Tower) -> Series {
        let c = self.c_lift(tw);
        let eh = tw.eps.pow(tw.half()).expect("unit");
        eh.mul(&tw.tau(&c))
            .mul(&self.r(tw).inv().expect("R is a unit"))
    }

    /// B = pi^n R^{-1}.
    pub fn b_coord(&self, tw: &Tower) -> Series {
        self.r(tw).inv().expect("R is a unit").shift(tw.n)
    }

    /// e_-(a) vdot e_-(B) e_0(C, D).
    pub fn matrix(&self, tw: &Tower) -> Mat2 {
        point_matrix(
            tw,
            &self.a_lift(tw),
            &self.b_coord(tw),
            &self.c_lift(tw),
            &self.d_coord(tw),
        )
    }

    /// Read the point off any matrix of its coset y I_E^{2m+1}.
    pub fn from_matrix(tw: &Tower, y: &Mat2) -> Result<Self> {
        let (a, c, _, _) = coordinates_of(tw, y)?;
        AdlvPoint::new(tw, &a, &c)
    }
}

pub fn point_matrix(tw: &Tower, a: &Series, b: &Series, c: &Series, d: &Series) -> Mat2 {
    e_minus(tw, a)
        .mul(&vdot(tw))
        .mul(&e_minus(tw, b))
        .mul(&e_zero(tw, c, d))
}

/// Coordinates (a, C, D, B) of a matrix y = e_-(a) vdot e_-(B) e_0(C, D) j.
pub fn coordinates_of(tw: &Tower, y: &Mat2) -> Result<(Series, Series, Series, Series)> {
    let (s, r) = vdot_exponents(tw);
    if y.e12.is_zero() {
        return Err(Error::Domain(
            "matrix does not lie in the cell of vdot".into(),
        ));
    }
    let a = y.e22.div(&y.e12)?;
    let d = y.e12.shift(s);
    let c = y.det().div(&y.e12)?.shift(-r);
    let b = y.e11.shift(s).div(&c)?;
    Ok((a, c, d, b))
}

/// All points, a-coordinate outermost.
pub fn enumerate_points(tw: &Tower) -> Vec<AdlvPoint> {
    let units_a = UnitClass::enumerate(tw.f, a_modulus(tw) - 1);
    let cs = UnitClass::enumerate(tw.f, tw.m + 1);
    let mut out = Vec::with_capacity(units_a.len() * cs.len());
    for u in &units_a {
        let a = AddClass::new(&u.rep().shift(1), 1, a_modulus(tw)).expect("valuation one");
        for c in &cs {
            out.push(AdlvPoint {
                a: a.clone(),
                c: c.clone(),
            });
        }
    }
    out
}

/// All a-coordinates (the first factor of the point set).
pub fn enumerate_a(tw: &Tower) -> Vec<AddClass> {
    UnitClass::enumerate(tw.f, a_modulus(tw) - 1)
        .iter()
        .map(|u| AddClass::new(&u.rep().shift(1), 1, a_modulus(tw)).expect("valuation one"))
        .collect()
}

pub fn point_count(tw: &Tower) -> u128 {
    let q = tw.q as u128;
    (q - 1) * (q - 1) * q.pow((tw.n + tw.d + 2 * tw.m - 1) as u32)
}

/// The image of x in the Iwahori level: a mod p^{n+d+1}.
pub fn iwahori_image(tw: &Tower, p: &AdlvPoint) -> AddClass {
    AddClass::new(p.a.rep(), 1, tw.n + tw.d + 1).expect("reduction")
}

/// x^{-1} tau(x) in J wdot J, checked on the matrix.
pub fn verify_point(tw: &Tower, p: &AdlvPoint) -> Result<bool> {
    verify_matrix(tw, &p.matrix(tw))
}

pub fn verify_matrix(tw: &Tower, x: &Mat2) -> Result<bool> {
    let z = x.inv()?.mul(&x.tau(tw));
    double_coset_member(tw, &z)
}

/// Left action of g in I_F on coordinates.
pub fn act_left(tw: &Tower, g: &Mat2, p: &AdlvPoint) -> Result<AdlvPoint> {
    let a = p.a_lift(tw);
    let den = g.e12.mul(&a).add(&g.e11);
    if !den.is_unit() {
        return Err(Error::Domain(
            "g does not act on the point set (denominator not a unit)".into(),
        ));
    }
    let na = g.e22.mul(&a).add(&g.e21).div(&den)?;
    let nc = g.det().mul(&p.c_lift(tw)).div(&den)?;
    AdlvPoint::new(tw, &na, &nc)
}

/// Left action computed on matrices.
pub fn act_left_matrix(tw: &Tower, g: &Mat2, p: &AdlvPoint) -> Result<AdlvPoint> {
    AdlvPoint::from_matrix(tw, &g.mul(&p.matrix(tw)))
}

/// Right action x.i(t, r) on coordinates.
pub fn act_right(tw: &Tower, g: &GammaElem, p: &AdlvPoint) -> Result<AdlvPoint> {
    if !g.is_integral() {
        return Err(Error::Domain("right action is defined for t a unit".into()));
    }
    let w = tw.work();
    let a = p.a_lift(tw);
    let c = p.c_lift(tw);
    let t = g.t.lift(w);
    let r = g.r.lift(w);
    let e_inv = tw.eps.pow(-tw.half())?;
    let ratio = c.mul(&tw.tau(&c).inv()?).mul(&e_inv);
    let h = tw.one().add(&ratio.mul(&r).shift(tw.n));
    let hinv = h.inv()?;
    let rr = tw.r_of(&a);
    let na = a.add(&ratio.mul(&rr).mul(&hinv).mul(&r).shift(tw.n + tw.d + 1));
    let nc = c.mul(&hinv).mul(&t);
    AdlvPoint::new(tw, &na, &nc)
}

pub fn act_right_matrix(tw: &Tower, g: &GammaElem, p: &AdlvPoint) -> Result<AdlvPoint> {
    AdlvPoint::from_matrix(tw, &p.matrix(tw).mul(&g.matrix(tw)))
}

/// g = w^c h iota(pi)^parity with h in I_F.
#[derive(Clone, Debug)]
pub struct GNormalized {
    pub central_exponent: i64,
    pub h: Mat2,
    pub pi_parity: i64,
}

impl GNormalized {
    pub fn new(tw: &Tower, g: &Mat2) -> Result<Self> {
        let det = g.det();
        let v2 = det
            .ord()
            .map_err(|_| Error::Domain("g is not invertible".into()))?;
        if v2 % 2 != 0 {
            return Err(Error::Domain("det g is not an element of F".into()));
        }
        let v = v2 / 2;
        let c = v.div_euclid(2);
        let p = v.rem_euclid(2);
        let mut h = g.scale(&tw.varpi_pow(-c));
        if p == 1 {
            h = h.mul(&iota_pi(tw).inv()?);
        }
        if !in_level(&h, CongruenceLevel::f(0), tw)? {
            return Err(Error::Membership("g does not lie in iota(E^x) I_F".into()));
        }
        Ok(GNormalized {
            central_exponent: c,
            h,
            pi_parity: p,
        })
    }

    pub fn from_parts(tw: &Tower, central_exponent: i64, h: Mat2, pi_parity: i64) -> Result<Self> {
        if !in_level(&h, CongruenceLevel::f(0), tw)? {
            return Err(Error::Membership("h does not lie in I_F".into()));
        }
        Ok(GNormalized {
            central_exponent,
            h,
            pi_parity: pi_parity.rem_euclid(2),
        })
    }

    pub fn identity(tw: &Tower) -> Self {
        GNormalized {
            central_exponent: 0,
            h: Mat2::identity(tw),
            pi_parity: 0,
        }
    }

    /// ord_F det g.
    pub fn det_order(&self) -> i64 {
        2 * self.central_exponent + self.pi_parity
    }

    pub fn recompose(&self, tw: &Tower) -> Mat2 {
        let mut g = self.h.scale(&tw.varpi_pow(self.central_exponent));
        if self.pi_parity == 1 {
            g = g.mul(&iota_pi(tw));
        }
        g
    }
}

/// beta_g on the a-coordinate and the factor beta_g(C)/C.
pub fn beta_coords(tw: &Tower, g: &GNormalized, a: &Series) -> Result<(Series, Series)> {
    let h = &g.h;
    let (num, den, extra) = if g.pi_parity == 0 {
        (h.e22.mul(a).add(&h.e21), h.e12.mul(a).add(&h.e11), tw.one())
    } else {
        let ep = tw.eps.shift(1);
        let s = a.shift(-1).add(&tw.one()).add(&tw.eps);
        (
            h.e22.mul(&ep).add(&h.e21.mul(&s)),
            h.e12.mul(&ep).add(&h.e11.mul(&s)),
            tw.eps.clone(),
        )
    };
    if !den.is_unit() {
        return Err(Error::Model(
            "beta_g does not preserve the point set".into(),
        ));
    }
    let na = num.div(&den)?;
    let mut cf = h.det().mul(&extra).div(&den)?;
    if g.central_exponent != 0 {
        cf = cf.mul(&tw.eps.pow(g.central_exponent)?);
    }
    Ok((na, cf))
}

/// beta_g(x) = g x i(pi,0)^{-ord det g}, on coordinates.
pub fn act_beta(tw: &Tower, g: &GNormalized, p: &AdlvPoint) -> Result<AdlvPoint> {
    let (na, cf) = beta_coords(tw, g, &p.a_lift(tw))?;
    AdlvPoint::new(tw, &na, &p.c_lift(tw).mul(&cf))
}

/// i(pi, 0) = diag(pi, tau(pi)).
pub fn i_pi_matrix(tw: &Tower) -> Mat2 {
    e_zero(tw, &tw.pi_pow(1), tw.tau_pi())
}

/// beta_g computed on matrices: h iota(pi)^p x i(pi,0)^{-p} i(eps,0)^c.
pub fn act_beta_matrix(tw: &Tower, g: &GNormalized, p: &AdlvPoint) -> Result<AdlvPoint> {
    let mut y = g.h.clone();
    if g.pi_parity == 1 {
        y = y.mul(&iota_pi(tw));
    }
    y = y.mul(&p.matrix(tw));
    if g.pi_parity == 1 {
        y = y.mul(&i_pi_matrix(tw).inv()?);
    }
    let c = g.central_exponent;
    if c != 0 {
        y = y.mul(&e_zero(tw, &tw.eps.pow(c)?, &tw.eps.pow(-c)?));
    }
    AdlvPoint::from_matrix(tw, &y)
}

/// beta_g computed from the undecomposed matrix: g x i(pi,0)^{-ord det g}.
pub fn act_beta_raw(tw: &Tower, g: &Mat2, p: &AdlvPoint) -> Result<AdlvPoint> {
    let v = g.det().ord()? / 2;
    let y = g.mul(&p.matrix(tw));
    let ip = i_pi_matrix(tw);
    let ipk = if v >= 0 { ip.inv()? } else { ip.clone() };
    let mut y = y;
    for _ in 0..v.abs() {
        y = y.mul(&ipk);
    }
    AdlvPoint::from_matrix(tw, &y)
}

/// Random element of I_F^r, entries known to pi-precision about `prec`.
pub fn random_iwahori_f<R: Rng + ?Sized>(tw: &Tower, rng: &mut R, r: i64, prec: i64) -> Mat2 {
    let wprec = (prec + 1) / 2;
    let (dg, up, lo) = CongruenceLevel::f(r).bounds();
    let diag = |rng: &mut R| {
        if r == 0 {
            tw.random_f_unit(rng, wprec)
        } else {
            tw.one()
                .truncate(2 * wprec)
                .add(&tw.random_f_ideal(rng, dg, wprec))
        }
    };
    let e11 = diag(rng);
    let e22 = diag(rng);
    let (up, lo) = if r == 0 { (0, 1) } else { (up, lo) };
    let e12 = tw.random_f_ideal(rng, up, wprec);
    let e21 = tw.random_f_ideal(rng, lo, wprec);
    Mat2::new(e11, e12, e21, e22)
}

/// Random element of iota(E^x) I_F with ord_F det in [-2, 3].
pub fn random_g<R: Rng + ?Sized>(tw: &Tower, rng: &mut R) -> Result<GNormalized> {
    let prec = tw.work();
    let k = rng.gen_range(-2i64..=3);
    let e = tw.random_unit(rng, prec).shift(k);
    let j = random_iwahori_f(tw, rng, 0, prec);
    GNormalized::new(tw, &iota(tw, &e)?.mul(&j))
}

/// Random element of iota(E^x) I_F with prescribed parity of ord_F det.
pub fn random_g_with_parity<R: Rng + ?Sized>(
    tw: &Tower,
    rng: &mut R,
    parity: i64,
) -> Result<GNormalized> {
    loop {
        let g = random_g(tw, rng)?;
        if g.pi_parity == parity.rem_euclid(2) {
            return Ok(g);
        }
    }
}

/// The Gamma-orbits on the point set, with a basepoint of C = 1 over each
/// class of (p/p^{n+d+1})*.
pub struct OrbitTable {
    pub basepoints: Vec<AdlvPoint>,
    pub gamma: Vec<GammaElem>,
    lookup: HashMap<PointKey, (u32, u32)>,
}

impl OrbitTable {
    pub fn build(tw: &Tower) -> Result<Self> {
        let lo = tw.n + tw.d + 1;
        let units = UnitClass::enumerate(tw.f, lo - 1);
        let one = tw.one();
        let basepoints: Vec<AdlvPoint> = units
            .iter()
            .map(|u| AdlvPoint::new(tw, &u.rep().pad_to(tw.work()).shift(1), &one))
            .collect::<Result<_>>()?;
        let gamma = enumerate_gamma(tw);
        let rows: Vec<Vec<(PointKey, (u32, u32))>> = basepoints
            .par_iter()
            .enumerate()
            .map(|(oi, bp)| {
                gamma
                    .iter()
                    .enumerate()
                    .map(|(gi, g)| Ok((act_right(tw, g, bp)?.key(), (oi as u32, gi as u32))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut lookup = HashMap::with_capacity(basepoints.len() * gamma.len());
        for row in rows {
            for (k, v) in row {
                if lookup.insert(k, v).is_some() {
                    return Err(Error::Model(
                        "Gamma does not act freely on the point set".into(),
                    ));
                }
            }
        }
        if lookup.len() as u128 != point_count(tw) {
            return Err(Error::Model(format!(
                "orbits cover {} points, expected {}",
                lookup.len(),
                point_count(tw)
            )));
        }
        Ok(OrbitTable {
            basepoints,
            gamma,
            lookup,
        })
    }

    pub fn orbit_count(&self) -> usize {
        self.basepoints.len()
    }

    /// (orbit, index into `gamma`) with p = basepoint . gamma.
    pub fn locate(&self, p: &AdlvPoint) -> Result<(usize, usize)> {
        self.lookup
            .get(&p.key())
            .map(|&(o, g)| (o as usize, g as usize))
            .ok_or_else(|| Error::Model(format!("{p:?} is not in the point set")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerParams;

    #[test]
    fn points_at_smallest_parameters() {
        let tw = Tower::build(&TowerParams::new(1, 1, 1)).unwrap();
        let pts = enumerate_points(&tw);
        assert_eq!(pts.len(), 32);
        for p in &pts {
            assert!(verify_point(&tw, p).unwrap());
            let q = AdlvPoint::from_matrix(&tw, &p.matrix(&tw)).unwrap();
            assert_eq!(&q, p);
        }
    }

    #[test]
    fn orbit_table_is_free() {
        let tw = Tower::build(&TowerParams::new(1, 1, 1)).unwrap();
        let t = OrbitTable::build(&tw).unwrap();
        assert_eq!(t.orbit_count(), 2);
    }
}
