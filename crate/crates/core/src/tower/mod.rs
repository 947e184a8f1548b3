//! The wild quadratic extension E = k((pi)) over F = k((w)) with
//! pi^2 + Delta*pi + w = 0, ord_F(Delta) = (d+1)/2, d odd.
//!
//! Everything is expanded in pi. Elements of F are pi-series fixed by tau.

mod classes;

pub use classes::{pack_bits, AddClass, EStarClass, UnitClass};

use crate::algebra::{check_degree, Fq, Series, Uniformizer};
use crate::error::{Error, Result};
use rand::Rng;

const PI: Uniformizer = Uniformizer::Pi;

/// Construction parameters for a tower.
#[derive(Clone, Debug)]
pub struct TowerParams {
    pub f: u8,
    pub d: i64,
    pub n: i64,
    /// Working precision; `None` selects the minimum 2(n+d+m+1) + 2(d+1).
    pub n_work: Option<i64>,
    /// Coefficients (in w) of the unit u with Delta = u * w^{(d+1)/2}.
    pub delta_unit: Vec<u8>,
}

impl TowerParams {
    pub fn new(f: u8, d: i64, n: i64) -> Self {
        TowerParams {
            f,
            d,
            n,
            n_work: None,
            delta_unit: vec![1],
        }
    }

    pub fn with_precision(mut self, n_work: i64) -> Self {
        self.n_work = Some(n_work);
        self
    }

    pub fn m(&self) -> i64 {
        2 * self.n + self.d - 1
    }

    pub fn min_precision(&self) -> i64 {
        let m = self.m();
        2 * (self.n + self.d + m + 1) + 2 * (self.d + 1)
    }

    pub fn validate(&self) -> Result<()> {
        check_degree(self.f)?;
        if self.d < 1 || self.d % 2 == 0 {
            return Err(Error::Usage("d must be odd".into()));
        }
        if self.n < 1 {
            return Err(Error::Usage("n must be positive".into()));
        }
        if 2 * self.n <= self.d {
            return Err(Error::Usage("2n > d required".into()));
        }
        if let Some(p) = self.n_work {
            if p < self.min_precision() {
                return Err(Error::Usage(format!(
                    "precision {p} is below the minimum {} for these parameters",
                    self.min_precision()
                )));
            }
        }
        if self.delta_unit.first().copied().unwrap_or(0) & ((1u8 << self.f) - 1) == 0 {
            return Err(Error::Usage(
                "the multiplier of Delta must be a unit".into(),
            ));
        }
        Ok(())
    }
}

/// The arithmetic context shared by every other module.
#[derive(Clone, Debug)]
pub struct Tower {
    pub f: u8,
    pub q: u64,
    pub d: i64,
    pub n: i64,
    pub m: i64,
    pub n_work: i64,
    /// Delta as a series in w.
    pub delta_f: Series,
    pub varpi: Series,
    pub delta: Series,
    pub eps: Series,
    pub eps0: Series,
    /// floor((n+1)/2) - floor(n/2)
    pub small_delta: i64,
    /// floor((n+d+1)/2)
    pub ell: i64,
    pub delta_ell: i64,
    const_prec: i64,
    tau_pi: Series,
    tau_min: i64,
    tau_powers: Vec<Series>,
    varpi_min: i64,
    varpi_powers: Vec<Series>,
}

impl Tower {
    pub fn build(params: &TowerParams) -> Result<Tower> {
        params.validate()?;
        let f = params.f;
        let d = params.d;
        let n = params.n;
        let m = params.m();
        let n_work = params.n_work.unwrap_or_else(|| params.min_precision());
        // Constants carry guard digits so that the precision of results is
        // governed by the inputs, not by the tower.
        let const_prec = n_work + 2 * (m + d) + 8;
        let half = (d + 1) / 2;

        let pi = Series::uniformizer_power(f, PI, 1, const_prec);
        let pi2 = Series::uniformizer_power(f, PI, 2, const_prec);
        let unit_in_varpi = |w: &Series| -> Series {
            let mut acc = Series::zero(f, PI, const_prec);
            let mut pow = Series::one(f, PI, const_prec);
            for &c in &params.delta_unit {
                acc = acc.add(&pow.scale(Fq::new(f, c)));
                pow = pow.mul(w).truncate(const_prec);
            }
            acc
        };
        let mut delta = Series::zero(f, PI, const_prec);
        let mut stable = false;
        for _ in 0..(const_prec + 4) {
            let w = pi2.add(&delta.mul(&pi)).truncate(const_prec);
            let next = unit_in_varpi(&w).mul(&w.pow(half)?).truncate(const_prec);
            if next.eq_mod(&delta, const_prec)? {
                stable = true;
                break;
            }
            delta = next;
        }
        if !stable || delta.precision() < const_prec {
            return Err(Error::Construction(
                "fixed-point iteration for Delta did not stabilize".into(),
            ));
        }
        let varpi = pi2.add(&delta.mul(&pi)).truncate(const_prec);
        let tau_pi = pi.add(&delta);
        let eps = tau_pi.div(&pi)?;
        let eps0 = delta.shift(-(d + 1));
        let mut dbits = vec![0u8; half as usize];
        dbits.extend(params.delta_unit.iter().copied());
        let delta_f = Series::from_bits(f, Uniformizer::Varpi, 0, &dbits, const_prec / 2);

        // powers of tau(pi)
        let tau_min = -(2 * (m + d) + 2 * n + 8);
        let tau_inv = tau_pi.inv()?;
        let mut neg = Vec::new();
        let mut cur = Series::one(f, PI, const_prec);
        for _ in 0..(-tau_min) {
            cur = cur.mul(&tau_inv);
            neg.push(cur.clone());
        }
        neg.reverse();
        let mut tau_powers = neg;
        let mut cur = Series::one(f, PI, const_prec);
        for _ in 0..const_prec {
            tau_powers.push(cur.clone());
            cur = cur.mul(&tau_pi).truncate(const_prec);
        }

        // powers of w
        let varpi_min = -(m + d + n + 4);
        let winv = varpi.inv()?;
        let mut neg = Vec::new();
        let mut cur = Series::one(f, PI, const_prec);
        for _ in 0..(-varpi_min) {
            cur = cur.mul(&winv);
            neg.push(cur.clone());
        }
        neg.reverse();
        let mut varpi_powers = neg;
        let mut cur = Series::one(f, PI, const_prec);
        for _ in 0..=(const_prec / 2) {
            varpi_powers.push(cur.clone());
            cur = cur.mul(&varpi).truncate(const_prec);
        }

        Ok(Tower {
            f,
            q: 1u64 << f,
            d,
            n,
            m,
            n_work,
            delta_f,
            varpi,
            delta,
            eps,
            eps0,
            small_delta: (n + 1) / 2 - n / 2,
            ell: (n + d + 1) / 2,
            delta_ell: ((n + d + 1) / 2) % 2,
            const_prec,
            tau_pi,
            tau_min,
            tau_powers,
            varpi_min,
            varpi_powers,
        })
    }

    pub fn params(&self) -> (u8, i64, i64, i64) {
        (self.f, self.d, self.n, self.m)
    }

    /// Precision at which canonical representatives are lifted.
    pub fn work(&self) -> i64 {
        self.n_work
    }

    pub fn constant_precision(&self) -> i64 {
        self.const_prec
    }

    pub fn half(&self) -> i64 {
        (self.d + 1) / 2
    }

    pub fn zero(&self) -> Series {
        Series::zero(self.f, PI, self.const_prec)
    }

    pub fn one(&self) -> Series {
        Series::one(self.f, PI, self.const_prec)
    }

    pub fn scalar(&self, c: Fq) -> Series {
        Series::monomial(c, 0, PI, self.const_prec)
    }

    /// pi^e at constant precision.
    pub fn pi_pow(&self, e: i64) -> Series {
        Series::uniformizer_power(self.f, PI, e, self.const_prec + e.max(0))
    }

    pub fn tau_pi(&self) -> &Series {
        &self.tau_pi
    }

    fn tau_power(&self, i: i64) -> Series {
        let idx = i - self.tau_min;
        if idx >= 0 && (idx as usize) < self.tau_powers.len() {
            self.tau_powers[idx as usize].clone()
        } else {
            self.tau_pi.pow(i).expect("tau(pi) is a nonzero element")
        }
    }

    /// The Galois involution pi -> pi + Delta.
    pub fn tau(&self, x: &Series) -> Series {
        let Some(v) = x.valuation() else {
            return Series::zero(self.f, PI, x.precision());
        };
        let top = x.precision();
        let mut out = Series::zero(self.f, PI, top);
        for i in v..top {
            let c = x.coeff(i).expect("within precision");
            if c.is_zero() {
                continue;
            }
            let t = self.tau_power(i);
            out = out.add(&t.scale(c).truncate(top));
        }
        out
    }

    pub fn norm(&self, x: &Series) -> Series {
        x.mul(&self.tau(x))
    }

    pub fn trace(&self, x: &Series) -> Series {
        x.add(&self.tau(x))
    }

    /// w^j as a pi-series.
    pub fn varpi_pow(&self, j: i64) -> Series {
        let idx = j - self.varpi_min;
        if idx >= 0 && (idx as usize) < self.varpi_powers.len() {
            self.varpi_powers[idx as usize].clone()
        } else {
            self.varpi.pow(j).expect("w is a nonzero element")
        }
    }

    /// Convert a w-series (an element of F) to its pi-expansion.
    pub fn from_varpi(&self, x: &Series) -> Series {
        debug_assert_eq!(x.tag(), Uniformizer::Varpi);
        let top = 2 * x.precision();
        let mut out = Series::zero(self.f, PI, top);
        if let Some(v) = x.valuation() {
            for j in v..x.precision() {
                let c = x.coeff(j).expect("within precision");
                if !c.is_zero() {
                    out = out.add(&self.varpi_pow(j).scale(c).truncate(top));
                }
            }
        }
        out
    }

    /// Expand an element of F (given in pi) in powers of w, returning the
    /// w-series known to precision ceil(prec/2).
    pub fn to_varpi(&self, x: &Series) -> Result<Series> {
        self.to_varpi_upto(x, i64::MAX)
    }

    fn to_varpi_upto(&self, x: &Series, stop: i64) -> Result<Series> {
        let top = x.precision();
        let wprec = (top + 1).div_euclid(2);
        let mut r = x.clone();
        let mut coeffs: Vec<(i64, Fq)> = Vec::new();
        while let Some(v) = r.valuation() {
            if v.rem_euclid(2) != 0 {
                return Err(Error::Domain(format!(
                    "element of odd valuation {v} is not in the base field"
                )));
            }
            let j = v / 2;
            if j > stop {
                break;
            }
            let c = r.leading().expect("nonzero");
            coeffs.push((j, c));
            r = r.add(&self.varpi_pow(j).scale(c).truncate(top));
        }
        let mut out = Series::zero(self.f, Uniformizer::Varpi, wprec);
        for (j, c) in coeffs {
            out = out.add(&Series::monomial(c, j, Uniformizer::Varpi, wprec));
        }
        Ok(out)
    }

    /// The w^0 coefficient of an element of F.
    pub fn varpi_constant_term(&self, x: &Series) -> Result<Fq> {
        if x.precision() < 1 {
            return Err(Error::Precision(
                "constant term of an element known below precision 1".into(),
            ));
        }
        let w = self.to_varpi_upto(x, 0)?;
        Ok(w.coeff(0).unwrap_or(Fq::zero(self.f)))
    }

    /// The level-one additive character of F, as a bit (0 for +1, 1 for -1).
    pub fn psi_bit(&self, x: &Series) -> Result<u8> {
        Ok(self.varpi_constant_term(x)?.trace_to_prime())
    }

    /// Write e = x0 + pi*x1 with x0, x1 in F.
    pub fn split(&self, e: &Series) -> Result<(Series, Series)> {
        let x1 = self.trace(e).div(&self.delta)?;
        let x0 = e.add(&x1.shift(1));
        Ok((x0, x1))
    }

    /// Random element of p^lo known to precision `prec`.
    pub fn random_in_ideal<R: Rng + ?Sized>(&self, rng: &mut R, lo: i64, prec: i64) -> Series {
        let bits: Vec<u8> = (lo..prec).map(|_| rng.gen::<u8>()).collect();
        Series::from_bits(self.f, PI, lo, &bits, prec)
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R, prec: i64) -> Series {
        let mut bits: Vec<u8> = (0..prec).map(|_| rng.gen::<u8>()).collect();
        let mask = (1u8 << self.f) - 1;
        while bits[0] & mask == 0 {
            bits[0] = rng.gen::<u8>();
        }
        Series::from_bits(self.f, PI, 0, &bits, prec)
    }

    /// Random element of U^k (k >= 1) or U (k = 0).
    pub fn random_unit_level<R: Rng + ?Sized>(&self, rng: &mut R, k: i64, prec: i64) -> Series {
        if k == 0 {
            self.random_unit(rng, prec)
        } else {
            self.one()
                .truncate(prec)
                .add(&self.random_in_ideal(rng, k, prec))
        }
    }

    /// Random element of p_F^lo (w-adic) as a pi-series.
    pub fn random_f_ideal<R: Rng + ?Sized>(&self, rng: &mut R, lo: i64, wprec: i64) -> Series {
        let bits: Vec<u8> = (lo..wprec).map(|_| rng.gen::<u8>()).collect();
        self.from_varpi(&Series::from_bits(
            self.f,
            Uniformizer::Varpi,
            lo,
            &bits,
            wprec,
        ))
    }

    pub fn random_f_unit<R: Rng + ?Sized>(&self, rng: &mut R, wprec: i64) -> Series {
        let mut bits: Vec<u8> = (0..wprec).map(|_| rng.gen::<u8>()).collect();
        let mask = (1u8 << self.f) - 1;
        while bits[0] & mask == 0 {
            bits[0] = rng.gen::<u8>();
        }
        self.from_varpi(&Series::from_bits(
            self.f,
            Uniformizer::Varpi,
            0,
            &bits,
            wprec,
        ))
    }

    /// R(a) = pi^{-(d+1)} (tau(a) + a) for a of valuation one.
    pub fn r_of(&self, a: &Series) -> Series {
        self.trace(a).shift(-(self.d + 1))
    }

    /// The monomial basis {c_j pi^i : lo <= i < hi} of p^lo/p^hi.
    pub fn monomial_basis(&self, lo: i64, hi: i64, prec: i64) -> Vec<Series> {
        let mut out = Vec::new();
        for i in lo..hi {
            for j in 0..self.f {
                out.push(Series::monomial(Fq::new(self.f, 1 << j), i, PI, prec));
            }
        }
        out
    }

    /// Find alpha in p^{-(m+d)}/p^{-(n+d-1)} with psi(tr(alpha*y)) = chi(y)
    /// for y in p^n/p^{m+1}; `chi` gives the bit of the character on the
    /// monomial basis of p^n/p^{m+1} in the order of `monomial_basis`.
    pub fn solve_alpha(&self, chi: &[u8]) -> Result<Series> {
        let (lo, hi) = (-(self.m + self.d), -(self.n + self.d - 1));
        let prec = self.work();
        let unknowns = self.monomial_basis(lo, hi, prec);
        let ys = self.monomial_basis(self.n, self.m + 1, prec);
        if chi.len() != ys.len() || unknowns.len() != ys.len() {
            return Err(Error::Domain("character table has the wrong size".into()));
        }
        let pairing = self.alpha_pairing(&unknowns, &ys)?;
        let sol = solve_f2(&pairing, chi)
            .ok_or_else(|| Error::Character("not in the image of the duality pairing".into()))?;
        let mut alpha = Series::zero(self.f, PI, hi);
        for (bit, u) in sol.iter().zip(unknowns.iter()) {
            if *bit == 1 {
                alpha = alpha.add(&u.truncate(hi));
            }
        }
        Ok(alpha)
    }

    /// Matrix of bits psi(tr(u_i * y_j)), rows indexed by y.
    pub fn alpha_pairing(&self, unknowns: &[Series], ys: &[Series]) -> Result<Vec<Vec<u8>>> {
        ys.iter()
            .map(|y| {
                unknowns
                    .iter()
                    .map(|u| self.psi_bit(&self.trace(&u.mul(y))))
                    .collect::<Result<Vec<u8>>>()
            })
            .collect()
    }

    /// psi(tr(alpha*z)), the character psi_{E,alpha}, as a bit.
    pub fn psi_e_alpha_bit(&self, alpha: &Series, z: &Series) -> Result<u8> {
        let a = alpha.pad_to(self.work());
        self.psi_bit(&self.trace(&a.mul(z)))
    }
}

/// Solve A x = b over F_2 (A given as rows of bits). Returns one solution.
pub fn solve_f2(a: &[Vec<u8>], b: &[u8]) -> Option<Vec<u8>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<u8>> = a
        .iter()
        .zip(b.iter())
        .map(|(r, &bb)| {
            let mut row = r.clone();
            row.push(bb);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| m[i][c] == 1) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..rows {
            if i != r && m[i][c] == 1 {
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(pivot_row.iter()) {
                    *x ^= *y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| row[cols] == 1) {
        return None;
    }
    let mut x = vec![0u8; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

/// Rank of a bit matrix over F_2.
pub fn rank_f2(a: &[Vec<u8>]) -> usize {
    let mut m = a.to_vec();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| m[i][c] == 1) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..rows {
            if i != r && m[i][c] == 1 {
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(pivot_row.iter()) {
                    *x ^= *y;
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower(f: u8, d: i64, n: i64) -> Tower {
        Tower::build(&TowerParams::new(f, d, n)).unwrap()
    }

    #[test]
    fn derived_integers() {
        let t = tower(1, 1, 1);
        assert_eq!((t.m, t.small_delta, t.ell, t.delta_ell), (2, 1, 1, 1));
        assert_eq!(tower(1, 3, 2).m, 6);
    }

    #[test]
    fn parameter_errors() {
        let e = Tower::build(&TowerParams::new(1, 2, 1)).unwrap_err();
        assert_eq!(e.to_string(), "d must be odd");
        let e = Tower::build(&TowerParams::new(1, 3, 1)).unwrap_err();
        assert_eq!(e.to_string(), "2n > d required");
        assert!(Tower::build(&TowerParams::new(1, 1, 1).with_precision(3)).is_err());
    }

    #[test]
    fn defining_equation_and_units() {
        for (f, d, n) in [(1, 1, 1), (2, 1, 1), (1, 3, 2), (1, 1, 2)] {
            let t = tower(f, d, n);
            let pi = t.pi_pow(1);
            let lhs = pi.mul(&pi).add(&t.delta.mul(&pi)).add(&t.varpi);
            assert!(lhs.eq_mod(&t.zero(), t.work()).unwrap());
            assert_eq!(t.varpi.valuation(), Some(2));
            assert_eq!(t.delta.valuation(), Some(d + 1));
            assert!(t.eps0.is_unit());
            let e1 = t.eps.add(&t.one());
            assert_eq!(e1.valuation(), Some(d));
            assert!(t.norm(&pi).eq_mod(&t.varpi, t.work()).unwrap());
            assert!(t.tau(&t.varpi).eq_mod(&t.varpi, t.work()).unwrap());
            let x = Series::from_bits(f, PI, 0, &[1, 1, 0, 0, 0, 1], t.work());
            assert!(t.tau(&t.tau(&x)).eq_mod(&x, t.work()).unwrap());
        }
    }

    #[test]
    fn varpi_round_trip() {
        let t = tower(2, 3, 2);
        let w = Series::from_bits(2, Uniformizer::Varpi, -2, &[1, 0, 3, 2, 1], 10);
        let x = t.from_varpi(&w);
        let back = t.to_varpi(&x).unwrap();
        assert!(back.eq_mod(&w, 10).unwrap());
        assert!(t.to_varpi(&t.pi_pow(1)).is_err());
    }

    #[test]
    fn split_reassembles() {
        let t = tower(1, 3, 2);
        let e = Series::from_bits(1, PI, -1, &[1, 0, 1, 1, 0, 1], t.work());
        let (x0, x1) = t.split(&e).unwrap();
        let p = x0.precision().min(x1.precision());
        assert!(t.tau(&x0).eq_mod(&x0, p).unwrap());
        assert!(t.tau(&x1).eq_mod(&x1, p - 1).unwrap());
        let back = x0.add(&x1.shift(1));
        assert!(back.eq_mod(&e, back.precision()).unwrap());
    }
}
