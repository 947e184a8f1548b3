//! Traces on the isotypic parts of functions on the point set: the closed
//! formula, the orbit-sum oracle, and the checks built on them.

use crate::adlv::{beta_coords, enumerate_a, random_iwahori_f, AdlvPoint, GNormalized, OrbitTable};
use crate::algebra::{Series, Uniformizer};
use crate::chars::{abelian_structure, AbelianStructure, CharacterSpec, Cyclotomic, TorsionGroup};
use crate::error::{Error, Result};
use crate::gl2::{e_minus, CongruenceLevel, Mat2};
use crate::groups::GammaBarElem;
use crate::tower::{pack_bits, AddClass, Tower, UnitClass};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashMap;

/// Data attached to a fixed point a of beta_g mod p^{n+d+1}.
#[derive(Clone, Debug)]
pub struct TraceTerm {
    pub a: AddClass,
    pub h: AddClass,
    pub t: UnitClass,
    pub rbar: AddClass,
}

/// A trace as a multiset of torsion classes: the value for a character
/// chi is chi(i(pi,0))^{det_order} * sum counts[i] chi(e_i) / denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCounts {
    pub det_order: i64,
    pub counts: Vec<i64>,
    pub denominator: u64,
}

impl TraceCounts {
    pub fn evaluate(&self, grp: &TorsionGroup, chi: &CharacterSpec) -> Result<Cyclotomic> {
        let m = chi.order;
        let mut buckets = vec![0i64; m as usize];
        for (idx, &c) in self.counts.iter().enumerate() {
            if c != 0 {
                buckets[chi.torsion_exponent_of(idx, grp) as usize] += c;
            }
        }
        let sum = Cyclotomic::from_exponent_counts(m, &buckets);
        let sum = sum
            .div_exact(&BigInt::from(self.denominator))
            .map_err(|_| {
                Error::Consistency(format!(
                    "trace sum {sum} is not divisible by {}",
                    self.denominator
                ))
            })?;
        let pe = (self.det_order as i128 * chi.pi_exponent as i128).rem_euclid(m as i128);
        Ok(sum.mul(&Cyclotomic::zeta_pow(m, pe as i64)))
    }

    pub fn support(&self) -> i64 {
        self.counts.iter().sum()
    }
}

/// The terms (a, h(g,a), t_a, rbar_a) for a in A_g.
pub fn trace_terms(tw: &Tower, g: &GNormalized) -> Result<Vec<TraceTerm>> {
    let (n, d, m) = (tw.n, tw.d, tw.m);
    let amod = n + d + m + 1;
    let terms: Vec<Option<TraceTerm>> = enumerate_a(tw)
        .par_iter()
        .map(|a| -> Result<Option<TraceTerm>> {
            let al = a.lift(tw.work());
            let (ba, cf) = beta_coords(tw, g, &al)?;
            let diff = ba.add(&al).reduce(amod)?;
            if !diff.ord_at_least(n + d + 1)? {
                return Ok(None);
            }
            let h = diff.shift(-(n + d + 1)).pad_to(tw.work());
            let r = tw.r_of(&al);
            let rinv = r.inv()?;
            let hr = h.mul(&rinv);
            let corr = tw.one().add(&hr.shift(n)).inv()?;
            let t = cf.mul(&corr);
            let rbar = hr.mul(&corr);
            Ok(Some(TraceTerm {
                a: a.clone(),
                h: AddClass::new(&h, 0, m)?,
                t: UnitClass::new(&t, m + 1)?,
                rbar: AddClass::new(&rbar, 0, d)?,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().flatten().collect())
}

/// The closed trace formula, as counts over torsion classes.
pub fn formula_counts(tw: &Tower, grp: &TorsionGroup, g: &GNormalized) -> Result<TraceCounts> {
    let mut counts = vec![0i64; grp.size()];
    for term in trace_terms(tw, g)? {
        let elem = GammaBarElem {
            t: crate::tower::EStarClass::from_unit(term.t),
            rbar: term.rbar,
        };
        counts[grp.index_of(&elem)?] += 1;
    }
    Ok(TraceCounts {
        det_order: g.det_order(),
        counts,
        denominator: tw.q.pow(tw.m as u32),
    })
}

pub fn trace_formula(
    tw: &Tower,
    grp: &TorsionGroup,
    g: &GNormalized,
    chi: &CharacterSpec,
) -> Result<Cyclotomic> {
    formula_counts(tw, grp, g)?.evaluate(grp, chi)
}

/// The torsion group, the orbit table and the torsion class of every
/// element of Gamma.
pub struct GeoModel {
    pub grp: TorsionGroup,
    pub table: OrbitTable,
    gamma_class: Vec<usize>,
}

impl GeoModel {
    pub fn build(tw: &Tower) -> Result<Self> {
        let grp = TorsionGroup::build(tw)?;
        let table = OrbitTable::build(tw)?;
        let gamma_class = table
            .gamma
            .iter()
            .map(|g| grp.index_of(&g.reduce(tw)))
            .collect::<Result<_>>()?;
        Ok(GeoModel {
            grp,
            table,
            gamma_class,
        })
    }

    pub fn dimension(&self) -> usize {
        self.table.orbit_count()
    }

    /// Trace of beta_g on the isotypic part, read off the permutation of
    /// orbits: orbit O contributes chi(gamma) when beta_g(x_O) = x_O.gamma.
    pub fn oracle_counts(&self, tw: &Tower, g: &GNormalized) -> Result<TraceCounts> {
        let hits: Vec<Option<usize>> = self
            .table
            .basepoints
            .par_iter()
            .enumerate()
            .map(|(oi, bp)| -> Result<Option<usize>> {
                let (na, cf) = beta_coords(tw, g, &bp.a_lift(tw))?;
                let y = AdlvPoint::new(tw, &na, &bp.c_lift(tw).mul(&cf))?;
                let (o, gi) = self.table.locate(&y)?;
                Ok((o == oi).then(|| self.gamma_class[gi]))
            })
            .collect::<Result<_>>()?;
        let mut counts = vec![0i64; self.grp.size()];
        for idx in hits.into_iter().flatten() {
            counts[idx] += 1;
        }
        Ok(TraceCounts {
            det_order: g.det_order(),
            counts,
            denominator: 1,
        })
    }

    pub fn trace_oracle(
        &self,
        tw: &Tower,
        g: &GNormalized,
        chi: &CharacterSpec,
    ) -> Result<Cyclotomic> {
        self.oracle_counts(tw, g)?.evaluate(&self.grp, chi)
    }

    pub fn trace_formula(
        &self,
        tw: &Tower,
        g: &GNormalized,
        chi: &CharacterSpec,
    ) -> Result<Cyclotomic> {
        trace_formula(tw, &self.grp, g, chi)
    }
}

/// (q-1) q^{n+d-1}.
pub fn expected_dimension(tw: &Tower) -> i64 {
    ((tw.q - 1) * tw.q.pow((tw.n + tw.d - 1) as u32)) as i64
}

/// An element of F given by w-adic digits, as a pi-series.
pub fn f_element(tw: &Tower, lo: i64, bits: &[u8]) -> Series {
    let wprec = (tw.work() + 1) / 2;
    tw.from_varpi(&Series::from_bits(
        tw.f,
        Uniformizer::Varpi,
        lo,
        bits,
        wprec,
    ))
}

/// All classes of p_F^lo/p_F^hi as pi-series representatives.
pub fn enumerate_f_ideal(tw: &Tower, lo: i64, hi: i64) -> Vec<Series> {
    let q = tw.q as u128;
    let total = q.pow((hi - lo) as u32);
    (0..total)
        .map(|k| {
            let bits: Vec<u8> = (0..(hi - lo))
                .map(|i| ((k >> (tw.f as u32 * i as u32)) & (q - 1)) as u8)
                .collect();
            f_element(tw, lo, &bits)
        })
        .collect()
}

/// All classes of U_F/U_F^hi (hi >= 1).
pub fn enumerate_f_units(tw: &Tower, hi: i64) -> Vec<Series> {
    enumerate_f_ideal(tw, 0, hi)
        .into_iter()
        .filter(|x| x.is_unit())
        .collect()
}

#[derive(Clone, Debug)]
pub struct UnipotentRow {
    pub ord: i64,
    pub formula: Cyclotomic,
    pub oracle: Cyclotomic,
    pub expected: i64,
}

/// Expected trace of e_-(u) with ord_F u = k.
pub fn expected_unipotent(tw: &Tower, k: i64) -> i64 {
    let nd = tw.n + tw.d;
    let top = tw.q.pow((nd - 1) as u32) as i64;
    if k < nd {
        0
    } else if k == nd {
        -top
    } else {
        (tw.q as i64 - 1) * top
    }
}

/// Traces of e_-(u) for ord_F u = 1 ..= n+d+2, u = w^k times a random unit.
pub fn unipotent_trace_table<R: Rng + ?Sized>(
    tw: &Tower,
    model: &GeoModel,
    chi: &CharacterSpec,
    rng: &mut R,
) -> Result<Vec<UnipotentRow>> {
    let mut rows = Vec::new();
    for k in 1..=(tw.n + tw.d + 2) {
        let unit = tw.random_f_unit(rng, (tw.work() + 1) / 2);
        let u = unit.mul(&tw.varpi_pow(k));
        let g = GNormalized::new(tw, &e_minus(tw, &u))?;
        rows.push(UnipotentRow {
            ord: k,
            formula: model.trace_formula(tw, &g, chi)?,
            oracle: model.trace_oracle(tw, &g, chi)?,
            expected: expected_unipotent(tw, k),
        });
    }
    Ok(rows)
}

fn integer_value(x: &Cyclotomic) -> Result<i64> {
    x.to_integer()
        .and_then(|v| v.to_i64())
        .ok_or_else(|| Error::Consistency(format!("trace {x} is not a small rational integer")))
}

/// Multiplicities of the characters of N^1/N^{n+d+1} = p_F/p_F^{n+d+1}.
#[derive(Clone, Debug)]
pub struct N1Spectrum {
    /// indexed by the F_2-linear functional on the digits of u
    pub multiplicities: Vec<i64>,
    pub expected: Vec<i64>,
}

impl N1Spectrum {
    pub fn matches(&self) -> bool {
        self.multiplicities == self.expected
    }

    pub fn total(&self) -> i64 {
        self.multiplicities.iter().sum()
    }
}

/// Counts for many g at once.
pub fn formula_counts_many(
    tw: &Tower,
    grp: &TorsionGroup,
    gs: &[GNormalized],
) -> Result<Vec<TraceCounts>> {
    gs.par_iter().map(|g| formula_counts(tw, grp, g)).collect()
}

/// One spectrum per character; the trace counts on p_F/p_F^{n+d+1} are
/// shared.
pub fn n1_spectra(
    tw: &Tower,
    grp: &TorsionGroup,
    chis: &[CharacterSpec],
) -> Result<Vec<N1Spectrum>> {
    let nd = tw.n + tw.d;
    let nbits = (tw.f as i64 * nd) as u32;
    let gs: Vec<GNormalized> = enumerate_f_ideal(tw, 1, nd + 1)
        .iter()
        .map(|u| GNormalized::new(tw, &e_minus(tw, u)))
        .collect::<Result<_>>()?;
    let counts = formula_counts_many(tw, grp, &gs)?;
    // the enumeration index of u packs its w-digits, so characters of the
    // additive group are sign patterns lam . k
    let size = 1u64 << nbits;
    let top_mask: u64 = ((1u64 << tw.f) - 1) << (tw.f as u32 * (nd - 1) as u32);
    chis.iter()
        .map(|chi| {
            let traces: Vec<i64> = counts
                .iter()
                .map(|c| integer_value(&c.evaluate(grp, chi)?))
                .collect::<Result<_>>()?;
            let mut mult = Vec::with_capacity(size as usize);
            let mut expected = Vec::with_capacity(size as usize);
            for lam in 0..size {
                let mut s: i64 = 0;
                for (k, tr) in traces.iter().enumerate() {
                    let sign = if (lam & k as u64).count_ones().is_multiple_of(2) {
                        1
                    } else {
                        -1
                    };
                    s += sign * tr;
                }
                if s % size as i64 != 0 {
                    return Err(Error::Consistency(
                        "N^1 multiplicity is not an integer".into(),
                    ));
                }
                mult.push(s / size as i64);
                expected.push(i64::from(lam & top_mask != 0));
            }
            Ok(N1Spectrum {
                multiplicities: mult,
                expected,
            })
        })
        .collect()
}

pub fn n1_spectrum(tw: &Tower, grp: &TorsionGroup, chi: &CharacterSpec) -> Result<N1Spectrum> {
    Ok(n1_spectra(tw, grp, std::slice::from_ref(chi))?.remove(0))
}

/// Representatives 1+X of the nontrivial classes of I_F^r/I_F^{r+1}.
pub fn level_step_reps(tw: &Tower, r: i64) -> Vec<Mat2> {
    assert!(r >= 1);
    let k = r / 2;
    let cs: Vec<u8> = (0..tw.q as u8).collect();
    let mut out = Vec::new();
    for &c1 in &cs {
        for &c2 in &cs {
            if c1 == 0 && c2 == 0 {
                continue;
            }
            let m = if r % 2 == 0 {
                Mat2::new(
                    tw.one().add(&f_element(tw, k, &[c1])),
                    tw.zero(),
                    tw.zero(),
                    tw.one().add(&f_element(tw, k, &[c2])),
                )
            } else {
                Mat2::new(
                    tw.one(),
                    f_element(tw, k, &[c1]),
                    f_element(tw, k + 1, &[c2]),
                    tw.one(),
                )
            };
            out.push(m);
        }
    }
    out
}

/// Characters of U_F^1/U_F^{top}, the possible twists on I_F^1.
pub struct FUnitCharacters {
    top: i64,
    keys: HashMap<u128, usize>,
    structure: AbelianStructure,
}

impl FUnitCharacters {
    pub fn build(tw: &Tower, top: i64) -> Result<Self> {
        let wprec = (tw.work() + 1) / 2;
        let elems: Vec<Series> = enumerate_f_ideal(tw, 1, top)
            .into_iter()
            .map(|x| tw.to_varpi(&tw.one().add(&x)).and_then(|w| w.reduce(top)))
            .collect::<Result<_>>()?;
        let keys: HashMap<u128, usize> = elems
            .iter()
            .enumerate()
            .map(|(i, e)| Ok((pack_bits(e, 0, top)?, i)))
            .collect::<Result<_>>()?;
        let ident = keys[&pack_bits(&Series::one(tw.f, Uniformizer::Varpi, top), 0, top)?];
        let law = |a: usize, b: usize| -> Result<usize> {
            let p = elems[a].mul(&elems[b]).reduce(top)?;
            keys.get(&pack_bits(&p, 0, top)?)
                .copied()
                .ok_or_else(|| Error::Structure("unit product escaped".into()))
        };
        let structure = abelian_structure(elems.len(), ident, &law)?;
        let _ = wprec;
        Ok(FUnitCharacters {
            top,
            keys,
            structure,
        })
    }

    pub fn count(&self) -> usize {
        self.keys.len()
    }

    pub fn order(&self) -> u64 {
        self.structure.exponent()
    }

    /// Exponent of zeta_order for character `idx` on a principal unit of F
    /// given as a pi-series.
    pub fn exponent(&self, tw: &Tower, idx: usize, det: &Series) -> Result<u64> {
        let w = tw.to_varpi(det)?.reduce(self.top)?;
        let e = *self
            .keys
            .get(&pack_bits(&w, 0, self.top)?)
            .ok_or_else(|| Error::Domain("determinant is not a principal unit".into()))?;
        let m = self.order();
        let mut rest = idx as u64;
        let mut acc = 0u64;
        for (&o, &x) in self.structure.orders.iter().zip(&self.structure.dlog[e]) {
            let k = rest % o;
            rest /= o;
            acc = (acc + k * (m / o) * x) % m;
        }
        Ok(acc)
    }

    /// Level of character idx: largest k with nontriviality on U_F^k.
    pub fn level(&self, tw: &Tower, idx: usize) -> Result<i64> {
        let mut lv = 0;
        for k in 1..self.top {
            for b in 0..tw.f {
                let u = tw.one().add(&f_element(tw, k, &[1 << b]));
                if self.exponent(tw, idx, &u)? != 0 {
                    lv = k;
                }
            }
        }
        Ok(lv)
    }
}

#[derive(Clone, Debug)]
pub struct DepthReport {
    pub j0: i64,
    pub expected_j0: i64,
    pub trivial_samples: usize,
    pub trivial_on_top: bool,
    pub twists_checked: usize,
    pub twist_min_j0: i64,
    pub twist_minimal: bool,
}

impl DepthReport {
    pub fn passed(&self) -> bool {
        self.j0 == self.expected_j0 && self.trivial_on_top && self.twist_minimal
    }
}

/// Depth j0 = max{r : the representation is nontrivial on I_F^r}, the
/// smallest j0 over twists by characters of F^x of level <= m, and
/// triviality on I_F^{m+d+1} on random samples. One report per character.
pub fn depth_and_minimality<R: Rng + ?Sized>(
    tw: &Tower,
    grp: &TorsionGroup,
    chis: &[CharacterSpec],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<DepthReport>> {
    let top = 2 * (tw.m + tw.d) + 2;
    let mut levels: Vec<(i64, Vec<Series>, Vec<TraceCounts>)> = Vec::new();
    for r in (1..=top).rev() {
        let reps = level_step_reps(tw, r);
        let gs: Vec<GNormalized> = reps
            .iter()
            .map(|x| GNormalized::new(tw, x))
            .collect::<Result<_>>()?;
        let dets = reps.iter().map(|x| x.det()).collect();
        levels.push((r, dets, formula_counts_many(tw, grp, &gs)?));
    }
    let top_gs: Vec<GNormalized> = (0..samples)
        .map(|_| GNormalized::new(tw, &random_iwahori_f(tw, rng, tw.m + tw.d + 1, tw.work())))
        .collect::<Result<_>>()?;
    let top_counts = formula_counts_many(tw, grp, &top_gs)?;
    let phis = FUnitCharacters::build(tw, tw.m + 1)?;
    let mut out = Vec::with_capacity(chis.len());
    for chi in chis {
        let dim = Cyclotomic::from_int(chi.order, expected_dimension(tw));
        // values at every level-step representative for this character
        let vals: Vec<(i64, Vec<(&Series, Cyclotomic)>)> = levels
            .iter()
            .map(|(r, dets, cs)| {
                let v = dets
                    .iter()
                    .zip(cs)
                    .map(|(det, c)| Ok((det, c.evaluate(grp, chi)?)))
                    .collect::<Result<_>>()?;
                Ok((*r, v))
            })
            .collect::<Result<_>>()?;
        let j0_of = |trivial: &dyn Fn(&Series, &Cyclotomic) -> Result<bool>| -> Result<i64> {
            for (r, v) in &vals {
                for (det, tr) in v {
                    if !trivial(det, tr)? {
                        return Ok(*r);
                    }
                }
            }
            Ok(0)
        };
        let j0 = j0_of(&|_, tr| Ok(*tr == dim))?;
        let trivial_on_top = top_counts
            .iter()
            .map(|c| c.evaluate(grp, chi))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|v| *v == dim);
        let order = num_integer::lcm(chi.order, phis.order());
        let dim_l = dim.embed(order)?;
        let s = order / phis.order();
        let mut twist_min = i64::MAX;
        for idx in 0..phis.count() {
            let test = |det: &Series, tr: &Cyclotomic| -> Result<bool> {
                let e = phis.exponent(tw, idx, det)? * s;
                let v = tr.embed(order)?.mul(&Cyclotomic::zeta_pow(order, e as i64));
                Ok(v == dim_l)
            };
            twist_min = twist_min.min(j0_of(&test)?);
        }
        out.push(DepthReport {
            j0,
            expected_j0: tw.m + tw.d,
            trivial_samples: samples,
            trivial_on_top,
            twists_checked: phis.count(),
            twist_min_j0: twist_min,
            twist_minimal: twist_min >= j0,
        });
    }
    Ok(out)
}

/// <chi, chi> over (B(F) cap I_F) / (B(F) cap I_F^{m+d+1}), B lower
/// triangular; one value per character.
pub fn borel_inner_products(
    tw: &Tower,
    grp: &TorsionGroup,
    chis: &[CharacterSpec],
) -> Result<Vec<Cyclotomic>> {
    let nd = tw.n + tw.d;
    let units = enumerate_f_units(tw, nd);
    let lowers = enumerate_f_ideal(tw, 1, nd + 1);
    let mut gs = Vec::new();
    for a in &units {
        for dd in &units {
            for c in &lowers {
                gs.push(GNormalized::new(
                    tw,
                    &Mat2::new(a.clone(), tw.zero(), c.clone(), dd.clone()),
                )?);
            }
        }
    }
    let size = BigInt::from(gs.len());
    let counts = formula_counts_many(tw, grp, &gs)?;
    chis.iter()
        .map(|chi| {
            let mut s = Cyclotomic::zero(chi.order);
            for c in &counts {
                let t = c.evaluate(grp, chi)?;
                s = s.add(&t.mul(&t.conj()));
            }
            s.div_exact(&size)
        })
        .collect()
}

pub fn borel_inner_product(
    tw: &Tower,
    grp: &TorsionGroup,
    chi: &CharacterSpec,
) -> Result<Cyclotomic> {
    Ok(borel_inner_products(tw, grp, std::slice::from_ref(chi))?.remove(0))
}

/// Inner sum check: the formula sum is divisible by q^m for every character.
pub fn divisible_for_all(tw: &Tower, grp: &TorsionGroup, counts: &TraceCounts) -> bool {
    let q = BigInt::from(tw.q.pow(tw.m as u32));
    grp.characters(1).iter().all(|chi| {
        let mut b = vec![0i64; chi.order as usize];
        for (i, &c) in counts.counts.iter().enumerate() {
            b[chi.torsion_exponent_of(i, grp) as usize] += c;
        }
        let s = Cyclotomic::from_exponent_counts(chi.order, &b);
        s.coeffs().iter().all(|c| (c % &q).is_zero())
    })
}

pub fn congruence_witness(tw: &Tower) -> (Mat2, CongruenceLevel) {
    let u = tw.varpi_pow(tw.n + tw.d);
    (e_minus(tw, &u), CongruenceLevel::f(tw.m + tw.d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerParams;

    #[test]
    fn identity_trace_is_dimension() {
        let tw = Tower::build(&TowerParams::new(1, 1, 1)).unwrap();
        let model = GeoModel::build(&tw).unwrap();
        let id = GNormalized::identity(&tw);
        for (_, chi) in model.grp.generic_characters(&tw, 1).unwrap() {
            let v = model.trace_formula(&tw, &id, &chi).unwrap();
            assert_eq!(v, Cyclotomic::from_int(chi.order, 2));
            assert_eq!(model.trace_oracle(&tw, &id, &chi).unwrap(), v);
        }
    }
}
