//! The type-theoretic side: additive characters, the element alpha dual to
//! a character of the torsion group, the character Lambda of
//! iota(E^x) I_F^{n+d}, and the trace of its induction to iota(E^x) I_F.

use crate::adlv::GNormalized;
use crate::algebra::Series;
use crate::chars::{CharacterSpec, Cyclotomic, DiagCharacter, TorsionGroup};
use crate::error::{Error, Result};
use crate::gl2::{e_plus, factor_e_times_level, iota_parts, Mat2};
use crate::groups::{beta_inv, beta_iso, PiElem};
use crate::tower::{rank_f2, AddClass, Tower};
use crate::traces_geo::{enumerate_f_ideal, enumerate_f_units, f_element, formula_counts};
use rand::Rng;
use rayon::prelude::*;

/// The level-one character psi(x) = (-1)^{Tr(w^0 coefficient of x)} of F.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PsiSpec;

impl PsiSpec {
    pub fn bit(&self, tw: &Tower, x: &Series) -> Result<u8> {
        tw.psi_bit(x)
    }

    /// psi(tr_M(X)).
    pub fn matrix_bit(&self, tw: &Tower, x: &Mat2) -> Result<u8> {
        tw.psi_bit(&x.trace())
    }
}

/// alpha = alpha0 + pi alpha1 in p_E^{-(m+d)}/p_E^{-(n+d-1)}.
#[derive(Clone, Debug)]
pub struct AlphaSpec {
    pub alpha: Series,
    pub alpha0: Series,
    pub alpha1: Series,
}

impl AlphaSpec {
    pub fn new(tw: &Tower, alpha: &Series) -> Result<Self> {
        let a = alpha.pad_to(tw.work());
        let (alpha0, alpha1) = tw.split(&a)?;
        Ok(AlphaSpec {
            alpha: a,
            alpha0,
            alpha1,
        })
    }

    /// iota(alpha) = [[a0 + D a1, a1], [w a1, a0]].
    pub fn matrix(&self, tw: &Tower) -> Mat2 {
        iota_parts(tw, &self.alpha0, &self.alpha1)
    }

    /// Class key in p_E^{-(m+d)}/p_E^{-(n+d-1)}.
    pub fn key(&self, tw: &Tower) -> Result<u128> {
        AddClass::new(&self.alpha, -(tw.m + tw.d), -(tw.n + tw.d - 1)).map(|c| c.key())
    }

    pub fn random<R: Rng + ?Sized>(tw: &Tower, rng: &mut R) -> Result<Self> {
        let a = tw.random_in_ideal(rng, -(tw.m + tw.d), -(tw.n + tw.d - 1));
        AlphaSpec::new(tw, &a)
    }
}

/// psi_{E,alpha}(z) = psi(tr(alpha z)), as a bit.
pub fn psi_e_alpha(tw: &Tower, alpha: &AlphaSpec, z: &Series) -> Result<u8> {
    tw.psi_e_alpha_bit(&alpha.alpha, &z.pad_to(tw.work()))
}

/// The same value from z = z0 + pi eps z1: psi(D (alpha1 z0 + alpha0 z1)).
pub fn psi_e_alpha_closed(tw: &Tower, alpha: &AlphaSpec, z: &Series) -> Result<u8> {
    let (x0, x1) = tw.split(&z.pad_to(tw.work()))?;
    // pi eps = tau(pi) = pi + D
    let z1 = x1;
    let z0 = x0.add(&tw.delta.mul(&z1));
    let inner = alpha.alpha1.mul(&z0).add(&alpha.alpha0.mul(&z1));
    tw.psi_bit(&tw.delta.mul(&inner))
}

/// theta on E^x and alpha, read off a character of the torsion group
/// through beta.
#[derive(Clone, Debug)]
pub struct LambdaSpec {
    pub theta: DiagCharacter,
    pub psi: PsiSpec,
    pub alpha: AlphaSpec,
}

fn half_order(order: u64) -> Result<u64> {
    if !order.is_multiple_of(2) {
        return Err(Error::Character(format!(
            "character order {order} is odd, no room for a sign"
        )));
    }
    Ok(order / 2)
}

fn sign_bit(e: u64, order: u64) -> Result<u8> {
    if e == 0 {
        Ok(0)
    } else if 2 * e == order {
        Ok(1)
    } else {
        Err(Error::Character(format!(
            "value zeta_{order}^{e} on the additive factor is not a sign"
        )))
    }
}

/// Pull chi back along beta: theta on the E^x factor, and alpha solving
/// psi_{E,alpha}(y) = chi(beta(1, y)) on p^n/p^{m+1}.
pub fn extract_theta_psi_alpha(
    tw: &Tower,
    grp: &TorsionGroup,
    chi: &CharacterSpec,
) -> Result<LambdaSpec> {
    let theta = grp.restrict(chi, tw)?;
    let one = tw.one();
    let bits = tw
        .monomial_basis(tw.n, tw.m + 1, tw.work())
        .iter()
        .map(|y| {
            let img = beta_iso(tw, &PiElem::new(tw, &one, y)?);
            sign_bit(grp.eval_exponent(chi, &img)?, chi.order)
        })
        .collect::<Result<Vec<u8>>>()?;
    let alpha = AlphaSpec::new(tw, &tw.solve_alpha(&bits)?)?;
    Ok(LambdaSpec {
        theta,
        psi: PsiSpec,
        alpha,
    })
}

/// psi_{E,alpha}(x) = theta(1+x) on every class of p^{n+d}/p^{m+1}.
pub fn compatibility_holds(tw: &Tower, lam: &LambdaSpec) -> Result<bool> {
    let half = half_order(lam.theta.order)?;
    for x in AddClass::enumerate(tw.f, tw.n + tw.d, tw.m + 1) {
        let xs = x.lift(tw.work());
        let lhs = psi_e_alpha(tw, &lam.alpha, &xs)? as u64 * half;
        let rhs = lam.theta.exponent_of(&tw.one().add(&xs))?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reassemble (theta, psi_{E,alpha}) on the push-out and compose with
/// beta^{-1}; true when this recovers chi on every torsion class.
pub fn beta_dual_round_trip(
    tw: &Tower,
    grp: &TorsionGroup,
    chi: &CharacterSpec,
    lam: &LambdaSpec,
) -> Result<bool> {
    let half = half_order(chi.order)?;
    for g in grp.elements() {
        let p = beta_inv(tw, g);
        let x = p.x.lift(tw.work());
        let e = (lam.theta.exponent_of(&x)?
            + psi_e_alpha(tw, &lam.alpha, &p.y.lift(tw.work()))? as u64 * half)
            % chi.order;
        if e != grp.eval_exponent(chi, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exponent of zeta_M for Lambda(iota(e) j), given the factorization.
pub fn lambda_exponent_of(tw: &Tower, lam: &LambdaSpec, e: &Series, j: &Mat2) -> Result<u64> {
    let half = half_order(lam.theta.order)?;
    let x = lam.alpha.matrix(tw).mul(&j.minus_identity(tw));
    let s = lam.psi.matrix_bit(tw, &x)? as u64;
    Ok((lam.theta.exponent_of(e)? + s * half) % lam.theta.order)
}

/// Lambda on h in iota(E^x) I_F^{n+d}.
pub fn lambda_eval(tw: &Tower, lam: &LambdaSpec, h: &Mat2) -> Result<Cyclotomic> {
    let (e, j) = factor_e_times_level(tw, h, tw.n + tw.d)?
        .ok_or_else(|| Error::Membership("element is not in iota(E^x) I_F^{n+d}".into()))?;
    Ok(Cyclotomic::zeta_pow(
        lam.theta.order,
        lambda_exponent_of(tw, lam, &e, &j)? as i64,
    ))
}

/// Exponents (a, b) with y in U_F/U_F^a and lambda in O_F/p_F^b.
pub fn coset_exponents(tw: &Tower) -> (i64, i64) {
    let delta = tw.n.rem_euclid(2);
    let nd = tw.n + tw.d;
    ((nd + 1 - delta) / 2, (nd - 1 + delta) / 2)
}

/// r_{y,l} = diag(1, y) e_+(l) for the fixed minimal-degree preimages.
pub fn coset_reps(tw: &Tower) -> Vec<(Series, Series, Mat2)> {
    let (a, b) = coset_exponents(tw);
    let ys = enumerate_f_units(tw, a);
    let ls = if b > 0 {
        enumerate_f_ideal(tw, 0, b)
    } else {
        vec![tw.zero()]
    };
    let mut out = Vec::with_capacity(ys.len() * ls.len());
    for y in &ys {
        for l in &ls {
            let d = Mat2::new(tw.one(), tw.zero(), tw.zero(), y.clone());
            out.push((y.clone(), l.clone(), d.mul(&e_plus(tw, l))));
        }
    }
    out
}

/// H r_1 = H r_2 for H = iota(U_E) I_F^{n+d}.
pub fn same_right_coset(tw: &Tower, r1: &Mat2, r2: &Mat2) -> Result<bool> {
    Ok(factor_e_times_level(tw, &r1.mul(&r2.inv()?), tw.n + tw.d)?.is_some())
}

/// The factorizations iota(e) j of the conjugates r g r^{-1} that lie in
/// iota(E^x) I_F^{n+d}; they do not depend on Lambda.
pub fn mackey_terms(tw: &Tower, g: &GNormalized) -> Result<Vec<(Series, Mat2)>> {
    let gm = g.recompose(tw);
    let terms: Vec<Option<(Series, Mat2)>> = coset_reps(tw)
        .par_iter()
        .map(|(_, _, r)| factor_e_times_level(tw, &r.mul(&gm).mul(&r.inv()?), tw.n + tw.d))
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().flatten().collect())
}

pub fn mackey_from_terms(
    tw: &Tower,
    terms: &[(Series, Mat2)],
    lam: &LambdaSpec,
) -> Result<Cyclotomic> {
    let order = lam.theta.order;
    let mut counts = vec![0i64; order as usize];
    for (e, j) in terms {
        counts[lambda_exponent_of(tw, lam, e, j)? as usize] += 1;
    }
    Ok(Cyclotomic::from_exponent_counts(order, &counts))
}

/// Trace of the induced representation at g, by the Mackey sum over the
/// coset representatives.
pub fn mackey_trace(tw: &Tower, g: &GNormalized, lam: &LambdaSpec) -> Result<Cyclotomic> {
    mackey_from_terms(tw, &mackey_terms(tw, g)?, lam)
}

/// The (y, lambda) with r g r^{-1} in iota(E^x) I_F^{n+d}.
pub fn contributing_cosets(tw: &Tower, g: &Mat2) -> Result<Vec<(Series, Series)>> {
    let mut out = Vec::new();
    for (y, l, r) in coset_reps(tw) {
        let h = r.mul(g).mul(&r.inv()?);
        if factor_e_times_level(tw, &h, tw.n + tw.d)?.is_some() {
            out.push((y, l));
        }
    }
    Ok(out)
}

/// Classes 1 + X of I_F^lo/I_F^hi (1 <= lo < hi), X running over the
/// lattice quotient.
pub fn iwahori_quotient(tw: &Tower, lo: i64, hi: i64) -> Vec<Mat2> {
    let diag = |r: i64| (r + 1).div_euclid(2);
    let upper = |r: i64| r.div_euclid(2);
    let lower = |r: i64| r.div_euclid(2) + 1;
    let x11 = enumerate_f_ideal(tw, diag(lo), diag(hi));
    let x12 = enumerate_f_ideal(tw, upper(lo), upper(hi));
    let x21 = enumerate_f_ideal(tw, lower(lo), lower(hi));
    let x22 = x11.clone();
    let mut out = Vec::new();
    for a in &x11 {
        for b in &x12 {
            for c in &x21 {
                for d in &x22 {
                    out.push(Mat2::new(
                        tw.one().add(a),
                        b.clone(),
                        c.clone(),
                        tw.one().add(d),
                    ));
                }
            }
        }
    }
    out
}

/// Random element of I_F^lo (lo >= 1).
pub fn random_iwahori_level<R: Rng + ?Sized>(tw: &Tower, rng: &mut R, lo: i64) -> Mat2 {
    let w = (tw.work() + 1) / 2;
    let d0 = (lo + 1).div_euclid(2);
    let u0 = lo.div_euclid(2);
    Mat2::new(
        tw.one().add(&tw.random_f_ideal(rng, d0, w)),
        tw.random_f_ideal(rng, u0, w),
        tw.random_f_ideal(rng, u0 + 1, w),
        tw.one().add(&tw.random_f_ideal(rng, d0, w)),
    )
}

/// g = u iota(1 + pi x) iota(pi)^parity.
pub fn structured_g(tw: &Tower, u: &Mat2, x: &Series, parity: i64) -> Result<GNormalized> {
    let ipx = iota_parts(tw, &tw.one(), x);
    let mut g = u.mul(&ipx);
    if parity == 1 {
        g = g.mul(&crate::gl2::iota_pi(tw));
    }
    GNormalized::new(tw, &g)
}

/// x in O_F/p_F^{ceil((m+1)/2)} for the structured samples.
pub fn structured_x_range(tw: &Tower) -> Vec<Series> {
    enumerate_f_ideal(tw, 0, (tw.m + 2) / 2)
}

#[derive(Clone, Debug)]
pub struct TheoremMismatch {
    pub character: String,
    pub g: String,
    pub det_order: i64,
    pub formula: String,
    pub mackey: String,
}

#[derive(Clone, Debug, Default)]
pub struct TheoremReport {
    pub odd_checked: usize,
    pub even_checked: usize,
    pub mismatches: Vec<TheoremMismatch>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.odd_checked > 0
    }

    pub fn odd_mismatches(&self) -> usize {
        self.mismatches
            .iter()
            .filter(|m| m.det_order.rem_euclid(2) == 1)
            .count()
    }
}

/// Compare the two traces on every sample, for every (chi, Lambda) pair;
/// counts are per (sample, character).
pub fn main_theorem_check(
    tw: &Tower,
    grp: &TorsionGroup,
    pairs: &[(CharacterSpec, LambdaSpec)],
    samples: &[GNormalized],
) -> Result<TheoremReport> {
    let rows: Vec<(i64, Vec<TheoremMismatch>)> = samples
        .par_iter()
        .map(|g| -> Result<(i64, Vec<TheoremMismatch>)> {
            let counts = formula_counts(tw, grp, g)?;
            let terms = mackey_terms(tw, g)?;
            let v = g.det_order();
            let mut bad = Vec::new();
            for (chi, lam) in pairs {
                let a = counts.evaluate(grp, chi)?;
                let b = mackey_from_terms(tw, &terms, lam)?;
                if a != b {
                    bad.push(TheoremMismatch {
                        character: chi.to_string(),
                        g: g.recompose(tw).to_string(),
                        det_order: v,
                        formula: a.to_string(),
                        mackey: b.to_string(),
                    });
                }
            }
            Ok((v, bad))
        })
        .collect::<Result<_>>()?;
    let mut rep = TheoremReport::default();
    for (v, bad) in rows {
        if v.rem_euclid(2) == 1 {
            rep.odd_checked += pairs.len();
        } else {
            rep.even_checked += pairs.len();
        }
        rep.mismatches.extend(bad);
    }
    Ok(rep)
}

/// All u iota(1+pi x) iota(pi)^p with u in I_F^{n+d}/I_F^{2(n+d)},
/// x in O_F/p_F^{ceil((m+1)/2)} and p in `parities`.
pub fn exhaustive_samples(tw: &Tower, parities: &[i64]) -> Result<Vec<GNormalized>> {
    let nd = tw.n + tw.d;
    let us = iwahori_quotient(tw, nd, 2 * nd);
    let xs = structured_x_range(tw);
    let mut out = Vec::new();
    for &p in parities {
        for u in &us {
            for x in &xs {
                out.push(structured_g(tw, u, x, p)?);
            }
        }
    }
    Ok(out)
}

/// Number of elements `exhaustive_samples` produces per determinant parity.
pub fn exhaustive_sample_count(tw: &Tower) -> u128 {
    let (lo, hi) = (tw.n + tw.d, 2 * (tw.n + tw.d));
    let diag = |r: i64| (r + 1).div_euclid(2);
    let upper = |r: i64| r.div_euclid(2);
    let lower = |r: i64| r.div_euclid(2) + 1;
    let e = 2 * (diag(hi) - diag(lo))
        + (upper(hi) - upper(lo))
        + (lower(hi) - lower(lo))
        + (tw.m + 2) / 2;
    (tw.q as u128).pow(e as u32)
}

/// `count` random structured samples, alternating the determinant parity.
pub fn random_samples<R: Rng + ?Sized>(
    tw: &Tower,
    rng: &mut R,
    count: usize,
) -> Result<Vec<GNormalized>> {
    let nd = tw.n + tw.d;
    let wx = (tw.m + 2) / 2;
    (0..count)
        .map(|i| {
            let u = random_iwahori_level(tw, rng, nd);
            // an exact representative, like the exhaustive enumeration
            let bits: Vec<u8> = (0..wx)
                .map(|_| rng.gen::<u8>() & (tw.q as u8 - 1))
                .collect();
            let x = f_element(tw, 0, &bits);
            let g = structured_g(tw, &u, &x, (i % 2) as i64)?;
            // a random central twist, to vary the determinant order
            let c: i64 = rng.gen_range(-1..=1);
            GNormalized::from_parts(tw, g.central_exponent + c, g.h.clone(), g.pi_parity)
        })
        .collect()
}

/// Basis of the lattice quotient J^lo/J^hi of matrices over F, as
/// elementary matrices c w^j E_ab.
fn lattice_basis(tw: &Tower, lo: i64, hi: i64) -> Vec<Mat2> {
    let bounds = [
        |r: i64| (r + 1).div_euclid(2),
        |r: i64| r.div_euclid(2),
        |r: i64| r.div_euclid(2) + 1,
        |r: i64| (r + 1).div_euclid(2),
    ];
    let mut out = Vec::new();
    for (slot, b) in bounds.iter().enumerate() {
        for j in b(lo)..b(hi) {
            for bit in 0..tw.f {
                let x = f_element(tw, j, &[1 << bit]);
                let mut e = [tw.zero(), tw.zero(), tw.zero(), tw.zero()];
                e[slot] = x;
                let [a, bb, c, d] = e;
                out.push(Mat2::new(a, bb, c, d));
            }
        }
    }
    out
}

/// Ranks and sizes of the three duality pairings, all with
/// k = n-1 and r = m.
#[derive(Clone, Debug)]
pub struct PairingRanks {
    pub matrix: (usize, usize, usize),
    pub field: (usize, usize, usize),
    pub restricted: (usize, usize, usize),
}

impl PairingRanks {
    pub fn all_perfect(&self) -> bool {
        [self.matrix, self.field, self.restricted]
            .iter()
            .all(|&(rows, cols, rank)| rows == cols && rank == rows)
    }
}

pub fn dual_pairing_ranks(tw: &Tower) -> Result<PairingRanks> {
    let (n, d, m) = (tw.n, tw.d, tw.m);
    let prec = tw.work();
    // J^{-(m+d)}/J^{-(n+d-1)} against I^{n+d}/I^{m+d+1}
    let dual = lattice_basis(tw, -(m + d), -(n + d - 1));
    let grp = lattice_basis(tw, n + d, m + d + 1);
    let pm: Vec<Vec<u8>> = grp
        .iter()
        .map(|x| dual.iter().map(|a| tw.psi_bit(&a.mul(x).trace())).collect())
        .collect::<Result<_>>()?;
    // p_E^{-(m+d)}/p_E^{-(n-1+d)} against p_E^n/p_E^{m+1}
    let du = tw.monomial_basis(-(m + d), -(n - 1 + d), prec);
    let ys = tw.monomial_basis(n, m + 1, prec);
    let pf = tw.alpha_pairing(&du, &ys)?;
    // p_E^{-(m+d)}/p_E^{-(n-1+2d)} against p_E^{n+d}/p_E^{m+1}
    let du2 = tw.monomial_basis(-(m + d), -(n - 1 + 2 * d), prec);
    let ys2 = tw.monomial_basis(n + d, m + 1, prec);
    let pr = tw.alpha_pairing(&du2, &ys2)?;
    let shape = |p: &Vec<Vec<u8>>, cols: usize| (p.len(), cols, rank_f2(p));
    Ok(PairingRanks {
        matrix: shape(&pm, dual.len()),
        field: shape(&pf, du.len()),
        restricted: shape(&pr, du2.len()),
    })
}

/// psi_M(iota(alpha)(iota(x) - 1)) = psi_E(alpha x) on p_E^{n+d}/p_E^{m+1}.
pub fn diagram_commutes(tw: &Tower, alpha: &AlphaSpec) -> Result<bool> {
    let am = alpha.matrix(tw);
    for x in AddClass::enumerate(tw.f, tw.n + tw.d, tw.m + 1) {
        let xs = x.lift(tw.work());
        let ix = crate::gl2::iota(tw, &tw.one().add(&xs))?;
        let lhs = tw.psi_bit(&am.mul(&ix.minus_identity(tw)).trace())?;
        if lhs != psi_e_alpha(tw, alpha, &xs)? {
            return Ok(false);
        }
    }
    Ok(true)
}
