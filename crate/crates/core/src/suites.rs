//! Verification suites and the JSON report shared by the command-line
//! driver and the acceptance tests.

use crate::adlv::{
    enumerate_points, iwahori_image, point_count, point_matrix, random_g, verify_matrix,
    verify_point, GNormalized,
};
use crate::algebra::{Series, Uniformizer};
use crate::chars::{CharacterSpec, Cyclotomic, DiagCharacter, TorsionGroup};
use crate::error::{Error, Result};
use crate::gl2::{
    double_coset_member, e_minus, e_plus, in_level, iota, wdot, CongruenceLevel, Mat2,
};
use crate::groups::{
    beta_inv, beta_iso, enumerate_pi_torsion, enumerate_torsion, gamma_matrix_raw, p_r,
    splitting_ix, GammaBarElem, GammaElem, PiElem,
};
use crate::tower::{rank_f2, AddClass, EStarClass, Tower, TowerParams, UnitClass};
use crate::traces_geo::{
    borel_inner_products, depth_and_minimality, expected_dimension, expected_unipotent,
    formula_counts, formula_counts_many, n1_spectra, GeoModel, TraceCounts,
};
use crate::types_bh::{
    beta_dual_round_trip, compatibility_holds, diagram_commutes, dual_pairing_ranks,
    exhaustive_sample_count, exhaustive_samples, extract_theta_psi_alpha, lambda_eval,
    lambda_exponent_of, mackey_trace, main_theorem_check, psi_e_alpha, psi_e_alpha_closed,
    random_iwahori_level, random_samples, AlphaSpec, LambdaSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Tower,
    Groups,
    Points,
    Traces,
    Theorem,
}

impl SuiteKind {
    /// Dependency order.
    pub const ALL: [SuiteKind; 5] = [
        SuiteKind::Tower,
        SuiteKind::Groups,
        SuiteKind::Points,
        SuiteKind::Traces,
        SuiteKind::Theorem,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Tower => "tower",
            SuiteKind::Groups => "groups",
            SuiteKind::Points => "points",
            SuiteKind::Traces => "traces",
            SuiteKind::Theorem => "theorem",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown suite '{s}' (expected tower, groups, points, traces, theorem or all)"
                ))
            })
    }
}

/// Sample sizes and exhaustiveness thresholds.
#[derive(Clone, Debug, Serialize)]
pub struct Effort {
    pub tower_samples: usize,
    pub verify_random: usize,
    pub coset_random: usize,
    pub group_random: usize,
    pub beta_pairs: usize,
    pub dual_oracle: usize,
    pub theorem_random: usize,
    pub theta_limit: usize,
    pub depth_samples: usize,
    pub psi_samples: usize,
    pub exhaustive_limit: usize,
}

impl Default for Effort {
    fn default() -> Self {
        Effort {
            tower_samples: 200,
            verify_random: 1000,
            coset_random: 500,
            group_random: 200,
            beta_pairs: 10_000,
            dual_oracle: 200,
            theorem_random: 500,
            theta_limit: 2,
            depth_samples: 50,
            psi_samples: 500,
            exhaustive_limit: 4096,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub f: u8,
    pub d: i64,
    pub n: i64,
    pub precision: Option<i64>,
    pub suites: Vec<SuiteKind>,
    pub seed: u64,
    pub effort: Effort,
    /// Force exhaustive theorem samples regardless of their number.
    pub exhaustive: bool,
}

impl RunConfig {
    pub fn new(f: u8, d: i64, n: i64) -> Self {
        RunConfig {
            f,
            d,
            n,
            precision: None,
            suites: SuiteKind::ALL.to_vec(),
            seed: 1,
            effort: Effort::default(),
            exhaustive: false,
        }
    }

    pub fn params(&self) -> TowerParams {
        let p = TowerParams::new(self.f, self.d, self.n);
        match self.precision {
            Some(w) => p.with_precision(w),
            None => p,
        }
    }

    pub fn tower(&self) -> Result<Tower> {
        self.params().validate()?;
        Tower::build(&self.params())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub expected: String,
    pub actual: String,
    pub elapsed_ms: u64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamsEcho {
    pub f: u8,
    pub q: u64,
    pub d: i64,
    pub n: i64,
    pub m: i64,
    pub precision: i64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub params: ParamsEcho,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

impl Report {
    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn failures(&self) -> Vec<(&str, &Check)> {
        self.suites
            .iter()
            .flat_map(|s| {
                s.checks
                    .iter()
                    .filter(|c| !c.passed())
                    .map(move |c| (s.name.as_str(), c))
            })
            .collect()
    }
}

/// Outcome of a check body: pass flag (or skip), expected, actual.
pub enum Outcome {
    Done(bool, String, String),
    Skipped(String),
}

fn done(ok: bool, expected: impl fmt::Display, actual: impl fmt::Display) -> Result<Outcome> {
    Ok(Outcome::Done(ok, expected.to_string(), actual.to_string()))
}

fn run_check(name: &str, anchor: &str, body: impl FnOnce() -> Result<Outcome>) -> Check {
    let t0 = Instant::now();
    let (status, expected, actual) = match body() {
        Ok(Outcome::Done(ok, e, a)) => (if ok { Status::Pass } else { Status::Fail }, e, a),
        Ok(Outcome::Skipped(why)) => (Status::Skip, String::new(), why),
        Err(e) => (Status::Fail, "no error".to_string(), e.to_string()),
    };
    Check {
        name: name.to_string(),
        anchor: anchor.to_string(),
        status,
        expected,
        actual,
        elapsed_ms: t0.elapsed().as_millis() as u64,
    }
}

/// A generic theta with all its lifts.
pub type ThetaLifts = (DiagCharacter, Vec<CharacterSpec>);

/// Shared state of one run: the tower, the lazily built orbit model and
/// the generic characters.
pub struct Ctx {
    pub tw: Tower,
    pub effort: Effort,
    pub seed: u64,
    pub exhaustive: bool,
    model: OnceLock<std::result::Result<GeoModel, Error>>,
    thetas: OnceLock<std::result::Result<Vec<ThetaLifts>, Error>>,
}

fn name_hash(s: &str) -> u64 {
    // FNV-1a, only to derive independent seeds per check
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

impl Ctx {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        Ok(Ctx {
            tw: cfg.tower()?,
            effort: cfg.effort.clone(),
            seed: cfg.seed,
            exhaustive: cfg.exhaustive,
            model: OnceLock::new(),
            thetas: OnceLock::new(),
        })
    }

    pub fn rng(&self, tag: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ name_hash(tag))
    }

    pub fn model(&self) -> Result<&GeoModel> {
        self.model
            .get_or_init(|| GeoModel::build(&self.tw))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Generic diagonal characters with all their lifts.
    pub fn all_thetas(&self) -> Result<&[ThetaLifts]> {
        self.thetas
            .get_or_init(|| {
                let grp = &self.model()?.grp;
                grp.generic_thetas(&self.tw, 1)?
                    .into_iter()
                    .map(|t| {
                        let lifts = grp.lift_characters(&t, &self.tw)?;
                        Ok((t, lifts))
                    })
                    .collect()
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    /// The first `theta_limit` generic thetas with their lifts.
    pub fn sampled_thetas(&self) -> Result<&[ThetaLifts]> {
        let all = self.all_thetas()?;
        Ok(&all[..all.len().min(self.effort.theta_limit)])
    }

    pub fn sampled_lifts(&self) -> Result<Vec<CharacterSpec>> {
        Ok(self
            .sampled_thetas()?
            .iter()
            .flat_map(|(_, l)| l.iter().cloned())
            .collect())
    }

    pub fn generic_characters(&self) -> Result<Vec<CharacterSpec>> {
        Ok(self
            .all_thetas()?
            .iter()
            .flat_map(|(_, l)| l.iter().cloned())
            .collect())
    }
}

fn ord_f(tw: &Tower, x: &Series) -> Result<Option<i64>> {
    Ok(tw.to_varpi(x)?.valuation())
}

/// Random element of I_E^r (r >= 1) at working precision.
fn random_level_e<R: Rng + ?Sized>(tw: &Tower, rng: &mut R, r: i64) -> Mat2 {
    let (dg, up, lo) = CongruenceLevel::e(r).bounds();
    let w = tw.work();
    Mat2::new(
        tw.one().add(&tw.random_in_ideal(rng, dg, w)),
        tw.random_in_ideal(rng, up, w),
        tw.random_in_ideal(rng, lo, w),
        tw.one().add(&tw.random_in_ideal(rng, dg, w)),
    )
}

fn random_e_star<R: Rng + ?Sized>(tw: &Tower, rng: &mut R) -> Series {
    let k = rng.gen_range(-2i64..=2);
    tw.random_unit(rng, tw.work()).shift(k)
}

fn congruent_mod_level(tw: &Tower, a: &Mat2, b: &Mat2, level: CongruenceLevel) -> Result<bool> {
    in_level(&a.inv()?.mul(b), level, tw)
}

// ---------------------------------------------------------------- tower

pub fn tower_suite(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let w = tw.work();
    let mut out = Vec::new();
    out.push(run_check(
        "defining_equation",
        "pi^2 + Delta pi + w = 0",
        || {
            let pi = tw.pi_pow(1);
            let lhs = pi.mul(&pi).add(&tw.delta.mul(&pi)).add(&tw.varpi);
            let ok = lhs.eq_mod(&tw.zero(), w)?;
            done(
                ok,
                "0 mod pi^N",
                if ok {
                    "0 mod pi^N".to_string()
                } else {
                    lhs.to_string()
                },
            )
        },
    ));
    out.push(run_check(
        "galois_involution",
        "tau(pi) = pi + Delta, tau^2 = id, tau|F = id",
        || {
            let mut rng = ctx.rng("galois_involution");
            let mut ok = tw
                .tau(&tw.pi_pow(1))
                .eq_mod(&tw.pi_pow(1).add(&tw.delta), w - 2)?;
            ok &= tw.tau(&tw.varpi).eq_mod(&tw.varpi, w - 2)?;
            let mut bad = 0;
            for _ in 0..ctx.effort.tower_samples {
                let x = tw.random_in_ideal(&mut rng, -3, w);
                if !tw.tau(&tw.tau(&x)).eq_mod(&x, w - 8)? {
                    bad += 1;
                }
            }
            done(
                ok && bad == 0,
                "all hold",
                format!("{bad} involution failures"),
            )
        },
    ));
    out.push(run_check("norm_of_pi", "N(pi) = pi tau(pi) = w", || {
        let n = tw.norm(&tw.pi_pow(1));
        done(
            n.eq_mod(&tw.varpi, w - 2)?,
            "w",
            if n.eq_mod(&tw.varpi, w - 2)? {
                "w"
            } else {
                "other"
            },
        )
    }));
    out.push(run_check("eps_level", "eps in U^d minus U^{d+1}, eps tau(eps) = 1", || {
        let v = tw.eps.add(&tw.one()).valuation();
        let unit = tw.eps0.is_unit();
        let norm_one = tw.norm(&tw.eps).eq_mod(&tw.one(), w - 4)?;
        let e0 = tw.delta.shift(-(tw.d + 1)).eq_mod(&tw.eps0, w - tw.d - 4)?;
        done(
            v == Some(tw.d) && unit && norm_one && e0,
            format!("ord(eps-1) = {}, eps0 unit, norm one", tw.d),
            format!("ord(eps-1) = {v:?}, eps0 unit {unit}, norm one {norm_one}, eps0 = pi^-(d+1) Delta {e0}"),
        )
    }));
    out.push(run_check(
        "trace_image",
        "tr(p_E^k) = p_F^floor((k+d+1)/2)",
        || {
            let mut rng = ctx.rng("trace_image");
            let mut bad = Vec::new();
            for k in -4..=2 * tw.m {
                let l = (k + tw.d + 1).div_euclid(2);
                let mut rows = Vec::new();
                let mut inside = true;
                for j in k..(k + 2 * tw.d + 6) {
                    for b in 0..tw.f {
                        let x = Series::from_bits(tw.f, Uniformizer::Pi, j, &[1 << b], w);
                        let t = tw.trace(&x);
                        if let Some(o) = ord_f(tw, &t)? {
                            inside &= o >= l;
                        }
                        let c = tw.to_varpi(&t)?.coeff(l)?;
                        rows.push((0..tw.f).map(|i| (c.bits() >> i) & 1).collect::<Vec<u8>>());
                    }
                }
                for _ in 0..20 {
                    let x = tw.random_in_ideal(&mut rng, k, w);
                    if let Some(o) = ord_f(tw, &tw.trace(&x))? {
                        inside &= o >= l;
                    }
                }
                let surjective = rank_f2(&rows) == tw.f as usize;
                if !inside || !surjective {
                    bad.push(k);
                }
            }
            done(
                bad.is_empty(),
                "inclusion and surjectivity for all k",
                format!("failing k: {bad:?}"),
            )
        },
    ));
    out.push(run_check(
        "tau_unit_filtration",
        "x^-1 tau(x) in U^{k+d} for x in U^k",
        || {
            let mut rng = ctx.rng("tau_unit_filtration");
            let mut bad = 0;
            for k in 0..=5 {
                for _ in 0..ctx.effort.tower_samples {
                    let x = tw.random_unit_level(&mut rng, k, w);
                    let y = x.inv()?.mul(&tw.tau(&x)).add(&tw.one());
                    if !y.ord_at_least(k + tw.d)? {
                        bad += 1;
                    }
                }
            }
            for _ in 0..ctx.effort.tower_samples {
                let x = random_e_star(tw, &mut rng);
                let y = x.inv()?.mul(&tw.tau(&x)).add(&tw.one());
                if !y.ord_at_least(tw.d)? {
                    bad += 1;
                }
            }
            done(bad == 0, "0 failures", format!("{bad} failures"))
        },
    ));
    out.push(run_check(
        "duality_solver",
        "psi(tr(alpha y)) pairing is perfect",
        || {
            let mut rng = ctx.rng("duality_solver");
            let du = tw.monomial_basis(-(tw.m + tw.d), -(tw.n + tw.d - 1), w);
            let ys = tw.monomial_basis(tw.n, tw.m + 1, w);
            let pairing = tw.alpha_pairing(&du, &ys)?;
            let rank = rank_f2(&pairing);
            let mut bad = 0;
            for _ in 0..20 {
                let a0 = AlphaSpec::random(tw, &mut rng)?;
                let bits = ys
                    .iter()
                    .map(|y| psi_e_alpha(tw, &a0, y))
                    .collect::<Result<Vec<u8>>>()?;
                let a1 = AlphaSpec::new(tw, &tw.solve_alpha(&bits)?)?;
                if a1.key(tw)? != a0.key(tw)? {
                    bad += 1;
                }
            }
            let zero = tw.solve_alpha(&vec![0; ys.len()])?;
            let zero_ok = AlphaSpec::new(tw, &zero)?.key(tw)? == 0;
            done(
                rank == ys.len() && du.len() == ys.len() && bad == 0 && zero_ok,
                format!(
                    "square of size {}, rank {}, round trips exact",
                    ys.len(),
                    ys.len()
                ),
                format!(
                    "{}x{} rank {rank}, {bad} round-trip failures, trivial -> 0: {zero_ok}",
                    ys.len(),
                    du.len()
                ),
            )
        },
    ));
    out.push(run_check(
        "r_well_defined",
        "R = pi^-(d+1)(tau(a)+a) in U/U^{m+1}",
        || {
            let mut rng = ctx.rng("r_well_defined");
            let amod = tw.n + tw.d + tw.m + 1;
            let mut bad = 0;
            for _ in 0..ctx.effort.tower_samples {
                let a = tw.random_unit(&mut rng, w).shift(1);
                let a2 = a.add(&tw.random_in_ideal(&mut rng, amod, w));
                let r1 = tw.r_of(&a);
                let r2 = tw.r_of(&a2);
                if !r1.is_unit() || UnitClass::new(&r1, tw.m + 1)? != UnitClass::new(&r2, tw.m + 1)?
                {
                    bad += 1;
                }
            }
            done(bad == 0, "0 failures", format!("{bad} failures"))
        },
    ));
    out
}

// ---------------------------------------------------------------- groups

pub fn groups_suite(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let w = tw.work();
    let lim = ctx.effort.exhaustive_limit;
    let mut out = Vec::new();
    let tors = enumerate_torsion(tw);
    out.push(run_check(
        "bar_mul_matches_matrices",
        "i(t,r)i(t',u) = i(tt'(1+pi^{2n}ru), r+u)",
        || {
            let mut rng = ctx.rng("bar_mul_matches_matrices");
            let pairs: Vec<(usize, usize)> = if tors.len() * tors.len() <= lim {
                (0..tors.len())
                    .flat_map(|i| (0..tors.len()).map(move |j| (i, j)))
                    .collect()
            } else {
                (0..ctx.effort.group_random)
                    .map(|_| (rng.gen_range(0..tors.len()), rng.gen_range(0..tors.len())))
                    .collect()
            };
            let bad: usize = pairs
                .par_iter()
                .map(|&(i, j)| -> Result<usize> {
                    let (a, b) = (&tors[i], &tors[j]);
                    let m = a.lift(tw).mul(&b.lift(tw), tw)?.reduce(tw);
                    Ok(usize::from(m != a.mul(b, tw)))
                })
                .sum::<Result<usize>>()?;
            done(
                bad == 0,
                format!("{} pairs agree", pairs.len()),
                format!("{bad} disagreements"),
            )
        },
    ));
    out.push(run_check(
        "commutator_formula",
        "[i(t,0), i(1,r)] = e_+((1 + t tau(t)^-1) r)",
        || {
            let mut rng = ctx.rng("commutator_formula");
            let lvl = CongruenceLevel::e(2 * tw.m + 1);
            let mut bad = 0;
            for _ in 0..ctx.effort.group_random {
                let t = random_e_star(tw, &mut rng);
                let r = tw.random_in_ideal(&mut rng, 0, w);
                let x = gamma_matrix_raw(tw, &t, &tw.zero());
                let y = gamma_matrix_raw(tw, &tw.one(), &r);
                let comm = x.mul(&y).mul(&x.inv()?).mul(&y.inv()?);
                let rhs = e_plus(tw, &tw.one().add(&t.div(&tw.tau(&t))?).mul(&r));
                if !congruent_mod_level(tw, &comm, &rhs, lvl)? {
                    bad += 1;
                }
            }
            done(bad == 0, "0 failures", format!("{bad} failures"))
        },
    ));
    out.push(run_check(
        "p_r_identities",
        "P_r = tau(P_r) = P_r^-1 = 1 + eps^n pi^2n r^2, P_r P_u = P_{r+u}",
        || {
            let mut rng = ctx.rng("p_r_identities");
            let lvl = CongruenceLevel::e(2 * tw.m + 1);
            let en = tw.eps.pow(tw.n)?;
            let mut bad = 0;
            for _ in 0..ctx.effort.group_random {
                let r = tw.random_in_ideal(&mut rng, 0, w);
                let u = tw.random_in_ideal(&mut rng, 0, w);
                let pr = p_r(tw, &r);
                let cls = |x: &Series| UnitClass::new(x, tw.m + 1);
                let sq = tw.one().add(&en.mul(&r.mul(&r)).shift(2 * tw.n));
                let mut ok = cls(&pr)? == cls(&tw.tau(&pr))?
                    && cls(&pr)? == cls(&pr.inv()?)?
                    && cls(&pr)? == cls(&sq)?
                    && cls(&pr.mul(&p_r(tw, &u)))? == cls(&p_r(tw, &r.add(&u)))?;
                let inv = Mat2::new(tw.one(), r.clone(), en.mul(&r).shift(2 * tw.n), tw.one());
                let i1r = gamma_matrix_raw(tw, &tw.one(), &r);
                ok &= congruent_mod_level(tw, &i1r.inv()?, &inv, lvl)?;
                if !ok {
                    bad += 1;
                }
            }
            done(bad == 0, "0 failures", format!("{bad} failures"))
        },
    ));
    out.push(run_check(
        "commutators_in_derived_subgroup",
        "[G~, G~] lies in {i(1,r) : r in p^d}",
        || {
            let mut rng = ctx.rng("commutators_in_derived_subgroup");
            let mut bad = 0;
            for _ in 0..ctx.effort.group_random {
                let x = gamma_matrix_raw(
                    tw,
                    &random_e_star(tw, &mut rng),
                    &tw.random_in_ideal(&mut rng, 0, w),
                );
                let y = gamma_matrix_raw(
                    tw,
                    &random_e_star(tw, &mut rng),
                    &tw.random_in_ideal(&mut rng, 0, w),
                );
                let c = GammaElem::from_matrix(tw, &x.mul(&y).mul(&x.inv()?).mul(&y.inv()?))?;
                if !(c.t.v == 0 && c.t.u.is_one() && c.r.rep().ord_at_least(tw.d)?) {
                    bad += 1;
                }
            }
            done(bad == 0, "0 failures", format!("{bad} failures"))
        },
    ));
    out.push(run_check(
        "beta_isomorphism",
        "beta: push-out -> abelianization is a bijective homomorphism",
        || {
            let pis = enumerate_pi_torsion(tw);
            let mut rng = ctx.rng("beta_isomorphism");
            let exhaustive = pis.len() * pis.len() <= lim;
            let pairs: Vec<(PiElem, PiElem)> = if exhaustive {
                pis.iter()
                    .flat_map(|a| pis.iter().map(move |b| (a.clone(), b.clone())))
                    .collect()
            } else {
                (0..ctx.effort.beta_pairs)
                    .map(|_| {
                        (
                            pis[rng.gen_range(0..pis.len())].clone(),
                            pis[rng.gen_range(0..pis.len())].clone(),
                        )
                    })
                    .collect()
            };
            let hom_bad: usize = pairs
                .par_iter()
                .map(|(a, b)| {
                    usize::from(
                        beta_iso(tw, &a.mul(b, tw)) != beta_iso(tw, a).mul(&beta_iso(tw, b), tw),
                    )
                })
                .sum();
            let images: HashSet<(u128, u128)> = pis
                .par_iter()
                .map(|p| {
                    let g = beta_iso(tw, p);
                    (g.t.u.key(), g.rbar.key())
                })
                .collect::<Vec<_>>()
                .into_iter()
                .collect();
            let inv_bad: usize = pis
                .par_iter()
                .map(|p| usize::from(beta_inv(tw, &beta_iso(tw, p)) != *p))
                .sum();
            let back_bad: usize = tors
                .par_iter()
                .map(|g| usize::from(beta_iso(tw, &beta_inv(tw, g)) != *g))
                .sum();
            done(
                hom_bad == 0
                    && images.len() == tors.len()
                    && pis.len() == tors.len()
                    && inv_bad + back_bad == 0,
                format!(
                    "{} pairs multiplicative, {} distinct images, inverse exact",
                    pairs.len(),
                    tors.len()
                ),
                format!(
                    "{hom_bad} non-multiplicative, {} images of {} elements, {} inverse failures",
                    images.len(),
                    pis.len(),
                    inv_bad + back_bad
                ),
            )
        },
    ));
    out.push(run_check(
        "splitting_homomorphism",
        "i_{x+y} = i_x i_y",
        || {
            let xs = AddClass::enumerate(tw.f, 0, tw.n + tw.d);
            let mut rng = ctx.rng("splitting_homomorphism");
            let pairs: Vec<(usize, usize)> = if xs.len() * xs.len() <= lim {
                (0..xs.len())
                    .flat_map(|i| (0..xs.len()).map(move |j| (i, j)))
                    .collect()
            } else {
                (0..ctx.effort.group_random)
                    .map(|_| (rng.gen_range(0..xs.len()), rng.gen_range(0..xs.len())))
                    .collect()
            };
            let bad = pairs
                .iter()
                .filter(|&&(i, j)| {
                    splitting_ix(tw, &xs[i].add(&xs[j]))
                        != splitting_ix(tw, &xs[i]).mul(&splitting_ix(tw, &xs[j]), tw)
                })
                .count();
            done(
                bad == 0,
                format!("{} pairs", pairs.len()),
                format!("{bad} failures"),
            )
        },
    ));
    out.push(run_check("exact_sequence", "0 -> E^x/U^{m+1} -> G~/G' -> O_E/p^d -> 0", || {
        let units = UnitClass::enumerate(tw.f, tw.m + 1);
        let images: HashSet<(u128, u128)> = units
            .iter()
            .map(|u| {
                let g = GammaBarElem {
                    t: EStarClass::from_unit(u.clone()),
                    rbar: AddClass::zero(tw.f, 0, tw.d),
                };
                (g.t.u.key(), g.rbar.key())
            })
            .collect();
        let kernel: HashSet<(u128, u128)> = tors
            .iter()
            .filter(|g| g.rbar.is_zero())
            .map(|g| (g.t.u.key(), g.rbar.key()))
            .collect();
        let rbars: HashSet<u128> = tors.iter().map(|g| g.rbar.key()).collect();
        let mut rng = ctx.rng("exact_sequence");
        let mut hom_bad = 0;
        for _ in 0..ctx.effort.group_random {
            let a = &tors[rng.gen_range(0..tors.len())];
            let b = &tors[rng.gen_range(0..tors.len())];
            if a.mul(b, tw).rbar != a.rbar.add(&b.rbar) {
                hom_bad += 1;
            }
        }
        let expect_r = tw.q.pow(tw.d as u32) as usize;
        done(
            images.len() == units.len() && images == kernel && rbars.len() == expect_r && hom_bad == 0,
            format!("injective, image = kernel, {expect_r} classes hit"),
            format!(
                "{} images of {} units, image = kernel {}, {} classes hit, {hom_bad} projection failures",
                images.len(),
                units.len(),
                images == kernel,
                rbars.len()
            ),
        )
    }));
    out.push(run_check(
        "free_times_torsion",
        "i(pi,0)^k x torsion without collision",
        || {
            let mut keys = HashSet::new();
            let pi = GammaBarElem::pi(tw);
            for k in -2..=2 {
                let pk = pi.pow(k, tw);
                for g in &tors {
                    let x = pk.mul(g, tw);
                    keys.insert((x.t.v, x.t.u.key(), x.rbar.key()));
                }
            }
            done(keys.len() == 5 * tors.len(), 5 * tors.len(), keys.len())
        },
    ));
    out.push(run_check(
        "character_orthogonality",
        "sum chi conj(chi') = |A| [chi = chi']",
        || {
            let grp = &ctx.model()?.grp;
            let chis = grp.characters(0);
            let k = chis.len();
            let mut rng = ctx.rng("character_orthogonality");
            let pairs: Vec<(usize, usize)> = if k * k <= lim {
                (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
            } else {
                // half diagonal, half off-diagonal
                (0..ctx.effort.group_random)
                    .map(|t| {
                        let i = rng.gen_range(0..k);
                        (i, if t % 2 == 0 { i } else { rng.gen_range(0..k) })
                    })
                    .collect()
            };
            let bad: usize = pairs
                .par_iter()
                .map(|&(i, j)| -> Result<usize> {
                    let (a, b) = (&chis[i], &chis[j]);
                    let mut s = Cyclotomic::zero(a.order);
                    for g in grp.elements() {
                        s = s.add(&grp.eval(a, g)?.mul(&grp.eval(b, g)?.conj()));
                    }
                    let want = if i == j { grp.size() as i64 } else { 0 };
                    Ok(usize::from(s != Cyclotomic::from_int(a.order, want)))
                })
                .sum::<Result<usize>>()?;
            done(
                bad == 0,
                format!("{} pairs orthogonal", pairs.len()),
                format!("{bad} failures"),
            )
        },
    ));
    out.push(run_check(
        "exotic_exponents",
        "exponent of U^n/U^{m+1} exceeds 2 iff 2n < m+1",
        || {
            let mut u = UnitClass::new(&tw.one().add(&tw.pi_pow(tw.n)), tw.m + 1)?;
            let mut exp = 1u64;
            while !u.is_one() {
                u = u.mul(&u);
                exp *= 2;
            }
            let mismatch = exp > 2;
            done(
                mismatch == (2 * tw.n < tw.m + 1),
                format!("mismatch {}", 2 * tw.n < tw.m + 1),
                format!("exponent {exp}"),
            )
        },
    ));
    out
}

// ---------------------------------------------------------------- points

pub fn points_suite(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let q = tw.q as u128;
    let mut out = Vec::new();
    let pts = enumerate_points(tw);
    out.push(run_check(
        "point_count",
        "(q-1)^2 q^{n+d+2m-1} points",
        || {
            let want = (q - 1) * (q - 1) * q.pow((tw.n + tw.d + 2 * tw.m - 1) as u32);
            done(
                pts.len() as u128 == want && point_count(tw) == want,
                want,
                pts.len(),
            )
        },
    ));
    out.push(run_check(
        "iwahori_image_count",
        "(q-1) q^{n+d-1} points at Iwahori level",
        || {
            let keys: HashSet<u128> = pts.iter().map(|p| iwahori_image(tw, p).key()).collect();
            let want = expected_dimension(tw) as usize;
            done(keys.len() == want, want, keys.len())
        },
    ));
    out.push(run_check(
        "points_verify",
        "x^-1 tau(x) in J wdot J",
        || {
            let mut rng = ctx.rng("points_verify");
            let sample: Vec<&crate::adlv::AdlvPoint> = if pts.len() <= ctx.effort.exhaustive_limit {
                pts.iter().collect()
            } else {
                (0..ctx.effort.verify_random)
                    .map(|_| &pts[rng.gen_range(0..pts.len())])
                    .collect()
            };
            let bad: usize = sample
                .par_iter()
                .map(|p| verify_point(tw, p).map(|ok| usize::from(!ok)))
                .sum::<Result<usize>>()?;
            done(
                bad == 0,
                format!("{} points verified", sample.len()),
                format!("{bad} rejected"),
            )
        },
    ));
    out.push(run_check(
        "perturbed_points_rejected",
        "B = pi^n R^-1 and D = eps^{(d+1)/2} tau(C) R^-1 are forced",
        || {
            let mut rng = ctx.rng("perturbed_points_rejected");
            let mut accepted = 0;
            for _ in 0..20 {
                let p = &pts[rng.gen_range(0..pts.len())];
                let (a, c) = (p.a_lift(tw), p.c_lift(tw));
                let (b, d) = (p.b_coord(tw), p.d_coord(tw));
                let b2 = b.add(&tw.pi_pow(tw.m - 1));
                let d2 = d.mul(&tw.one().add(&tw.pi_pow(tw.m)));
                if verify_matrix(tw, &point_matrix(tw, &a, &b2, &c, &d))? {
                    accepted += 1;
                }
                if verify_matrix(tw, &point_matrix(tw, &a, &b, &c, &d2))? {
                    accepted += 1;
                }
            }
            done(accepted == 0, "0 accepted", format!("{accepted} accepted"))
        },
    ));
    out.push(run_check(
        "double_coset_soundness",
        "J wdot J contains j1 wdot j2, excludes e_-(pi^m) wdot",
        || {
            let mut rng = ctx.rng("double_coset_soundness");
            let lvl = 2 * tw.m + 1;
            let wd = wdot(tw);
            let mut missed = 0;
            for _ in 0..ctx.effort.coset_random {
                let g = random_level_e(tw, &mut rng, lvl)
                    .mul(&wd)
                    .mul(&random_level_e(tw, &mut rng, lvl));
                if !double_coset_member(tw, &g)? {
                    missed += 1;
                }
            }
            let neg = double_coset_member(tw, &e_minus(tw, &tw.pi_pow(tw.m)).mul(&wd))?;
            let pos = double_coset_member(tw, &wd)?;
            done(
                missed == 0 && pos && !neg,
                "all positives accepted, negative rejected",
                format!("{missed} positives rejected, wdot {pos}, perturbed {neg}"),
            )
        },
    ));
    out.push(run_check(
        "gamma_fibers_free",
        "fibers over the Iwahori level are free Gamma-orbits",
        || {
            let model = ctx.model()?;
            let dim = model.dimension();
            let free = dim * model.table.gamma.len() == pts.len();
            done(
                free && dim as i64 == expected_dimension(tw),
                format!(
                    "{} orbits of size {}",
                    expected_dimension(tw),
                    model.table.gamma.len()
                ),
                format!("{dim} orbits covering {} points", pts.len()),
            )
        },
    ));
    out
}

// ---------------------------------------------------------------- traces

fn counts_value(grp: &TorsionGroup, c: &TraceCounts, chi: &CharacterSpec) -> Result<Cyclotomic> {
    c.evaluate(grp, chi)
}

pub fn traces_unipotent(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    vec![run_check(
        "unipotent_traces",
        "tr e_-(u) = 0, -q^{n+d-1}, (q-1)q^{n+d-1} by ord_F(u)",
        || {
            let model = ctx.model()?;
            let chis = ctx.generic_characters()?;
            let mut rng = ctx.rng("unipotent_traces");
            let mut bad = Vec::new();
            let mut table = Vec::new();
            for k in 1..=(tw.n + tw.d + 2) {
                let unit = tw.random_f_unit(&mut rng, (tw.work() + 1) / 2);
                let g = GNormalized::new(tw, &e_minus(tw, &unit.mul(&tw.varpi_pow(k))))?;
                let fc = formula_counts(tw, &model.grp, &g)?;
                let oc = model.oracle_counts(tw, &g)?;
                let want = expected_unipotent(tw, k);
                table.push(format!("{k}:{want}"));
                for chi in &chis {
                    let e = Cyclotomic::from_int(chi.order, want);
                    if counts_value(&model.grp, &fc, chi)? != e
                        || counts_value(&model.grp, &oc, chi)? != e
                    {
                        bad.push(format!("ord {k} {chi}"));
                    }
                }
            }
            done(
                bad.is_empty(),
                format!(
                    "table {} for {} characters, both engines",
                    table.join(" "),
                    chis.len()
                ),
                if bad.is_empty() {
                    "all equal".to_string()
                } else {
                    format!("{} failures, first {}", bad.len(), bad[0])
                },
            )
        },
    )]
}

pub fn traces_dimension(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let mut out = Vec::new();
    out.push(run_check(
        "dimension_and_lifts",
        "dim = (q-1)q^{n+d-1} for all q^d lifts",
        || {
            let model = ctx.model()?;
            let thetas = ctx.sampled_thetas()?;
            let id = GNormalized::identity(tw);
            let fc = formula_counts(tw, &model.grp, &id)?;
            let oc = model.oracle_counts(tw, &id)?;
            let dim = expected_dimension(tw);
            let mut bad = 0;
            let mut lifts = 0;
            for (_, ls) in thetas {
                if ls.len() as u64 != tw.q.pow(tw.d as u32) {
                    bad += 1;
                }
                for chi in ls {
                    lifts += 1;
                    let e = Cyclotomic::from_int(chi.order, dim);
                    if counts_value(&model.grp, &fc, chi)? != e
                        || counts_value(&model.grp, &oc, chi)? != e
                    {
                        bad += 1;
                    }
                }
            }
            done(
                bad == 0 && lifts > 0,
                format!("dim {dim} on {lifts} lifts"),
                format!("{bad} failures"),
            )
        },
    ));
    out.push(run_check(
        "central_character",
        "the center acts by theta restricted to F^x",
        || {
            let model = ctx.model()?;
            let mut rng = ctx.rng("central_character");
            let dim = expected_dimension(tw);
            let mut bad = 0;
            let mut zs = vec![tw.varpi.clone()];
            for _ in 0..4 {
                let k = rng.gen_range(-2i64..=2);
                zs.push(
                    tw.random_f_unit(&mut rng, (tw.work() + 1) / 2)
                        .mul(&tw.varpi_pow(k)),
                );
            }
            for z in &zs {
                let g = GNormalized::new(tw, &Mat2::identity(tw).scale(z))?;
                let fc = formula_counts(tw, &model.grp, &g)?;
                let oc = model.oracle_counts(tw, &g)?;
                for (theta, ls) in ctx.sampled_thetas()? {
                    let want = theta.eval(z)?.scale(&dim.into());
                    for chi in ls {
                        let want = want.embed(chi.order)?;
                        if counts_value(&model.grp, &fc, chi)? != want
                            || counts_value(&model.grp, &oc, chi)? != want
                        {
                            bad += 1;
                        }
                    }
                }
            }
            done(
                bad == 0,
                "theta(z) dim for z = w and random z",
                format!("{bad} failures"),
            )
        },
    ));
    out.push(run_check(
        "depth_and_minimality",
        "j0 = m+d, trivial on I_F^{m+d+1}, minimal among twists",
        || {
            let model = ctx.model()?;
            let chis = ctx.sampled_lifts()?;
            let mut rng = ctx.rng("depth_and_minimality");
            let reps =
                depth_and_minimality(tw, &model.grp, &chis, ctx.effort.depth_samples, &mut rng)?;
            let bad: Vec<String> = reps
                .iter()
                .zip(&chis)
                .filter(|(r, _)| !r.passed())
                .map(|(r, c)| {
                    format!(
                        "{c}: j0 {} twist min {} top trivial {}",
                        r.j0, r.twist_min_j0, r.trivial_on_top
                    )
                })
                .collect();
            let twists = reps.first().map(|r| r.twists_checked).unwrap_or(0);
            done(
                bad.is_empty() && !reps.is_empty(),
                format!(
                    "j0 = {} for {} characters, {} twists each",
                    tw.m + tw.d,
                    chis.len(),
                    twists
                ),
                if bad.is_empty() {
                    "all hold".to_string()
                } else {
                    bad.join("; ")
                },
            )
        },
    ));
    out
}

pub fn traces_dual(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    vec![run_check(
        "formula_equals_orbit_oracle",
        "closed trace formula = orbit sum, q^m divides the inner sum",
        || {
            let model = ctx.model()?;
            let chis = ctx.generic_characters()?;
            let mut rng = ctx.rng("formula_equals_orbit_oracle");
            let mut gs: Vec<GNormalized> = (0..ctx.effort.dual_oracle)
                .map(|_| random_g(tw, &mut rng))
                .collect::<Result<_>>()?;
            if 2 * exhaustive_sample_count(tw) <= ctx.effort.exhaustive_limit as u128 {
                gs.extend(exhaustive_samples(tw, &[0, 1])?);
            }
            let bad: Vec<String> = gs
                .par_iter()
                .map(|g| -> Result<Option<String>> {
                    let fc = formula_counts(tw, &model.grp, g)?;
                    let oc = model.oracle_counts(tw, g)?;
                    let q = fc.denominator as i64;
                    if fc.counts.iter().any(|c| c % q != 0) {
                        return Ok(Some(format!("inner sum not divisible by {q}")));
                    }
                    if fc.counts.iter().zip(&oc.counts).any(|(a, b)| a / q != *b) {
                        return Ok(Some(format!("count mismatch at {:?}", g.recompose(tw))));
                    }
                    for chi in &chis {
                        if counts_value(&model.grp, &fc, chi)?
                            != counts_value(&model.grp, &oc, chi)?
                        {
                            return Ok(Some(format!("value mismatch for {chi}")));
                        }
                    }
                    Ok(None)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            done(
                bad.is_empty(),
                format!(
                    "{} elements, {} characters, exact equality",
                    gs.len(),
                    chis.len()
                ),
                if bad.is_empty() {
                    "all equal".to_string()
                } else {
                    format!("{} failures, first: {}", bad.len(), bad[0])
                },
            )
        },
    )]
}

pub fn traces_spectrum(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let mut out = Vec::new();
    out.push(run_check(
        "n1_spectrum",
        "multiplicity 1 exactly on characters nontrivial on N^{n+d}",
        || {
            let model = ctx.model()?;
            let chis = ctx.generic_characters()?;
            let spectra = n1_spectra(tw, &model.grp, &chis)?;
            let dim = expected_dimension(tw);
            let bad = spectra
                .iter()
                .filter(|s| {
                    !s.matches()
                        || s.total() != dim
                        || s.multiplicities.iter().filter(|&&m| m == 1).count() as i64 != dim
                })
                .count();
            done(
                bad == 0,
                format!("{dim} characters of multiplicity one, total {dim}"),
                format!("{bad} of {} spectra differ", spectra.len()),
            )
        },
    ));
    out.push(run_check(
        "irreducibility",
        "<chi, chi> = 1 over the Borel quotient",
        || {
            let nd = tw.n + tw.d;
            let units = (tw.q - 1) * tw.q.pow((nd - 1) as u32);
            let size = (units * units * tw.q.pow(nd as u32)) as usize;
            if size > ctx.effort.exhaustive_limit {
                return Ok(Outcome::Skipped(format!(
                    "quotient of size {size} above the exhaustive limit"
                )));
            }
            let model = ctx.model()?;
            let chis = ctx.sampled_lifts()?;
            let ips = borel_inner_products(tw, &model.grp, &chis)?;
            let bad = ips
                .iter()
                .filter(|v| **v != Cyclotomic::one(v.order()))
                .count();
            done(
                bad == 0,
                format!("1 for {} characters", chis.len()),
                format!("{bad} failures"),
            )
        },
    ));
    out
}

pub fn traces_suite(ctx: &Ctx) -> Vec<Check> {
    let mut out = traces_unipotent(ctx);
    out.extend(traces_dimension(ctx));
    out.extend(traces_dual(ctx));
    out.extend(traces_spectrum(ctx));
    out
}

// ---------------------------------------------------------------- theorem

/// Extracted (chi, Lambda) for every lift of the thetas in use.
fn theorem_pairs(ctx: &Ctx, all: bool) -> Result<Vec<(CharacterSpec, LambdaSpec)>> {
    let grp = &ctx.model()?.grp;
    let thetas = if all {
        ctx.all_thetas()?
    } else {
        ctx.sampled_thetas()?
    };
    thetas
        .iter()
        .flat_map(|(_, ls)| ls.iter())
        .map(|chi| Ok((chi.clone(), extract_theta_psi_alpha(&ctx.tw, grp, chi)?)))
        .collect()
}

pub fn theorem_main(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let t0 = Instant::now();
    let prepared = (|| -> Result<_> {
        let grp = &ctx.model()?.grp;
        let structured_count = 2 * exhaustive_sample_count(tw);
        let exhaustive = ctx.exhaustive || structured_count <= ctx.effort.exhaustive_limit as u128;
        let samples = if exhaustive {
            exhaustive_samples(tw, &[1, 0])?
        } else {
            let mut rng = ctx.rng("theorem_samples");
            random_samples(tw, &mut rng, ctx.effort.theorem_random)?
        };
        let pairs = theorem_pairs(ctx, exhaustive)?;
        let rep = main_theorem_check(tw, grp, &pairs, &samples)?;
        Ok((exhaustive, samples.len(), pairs.len(), rep))
    })();
    let mut out = Vec::new();
    match prepared {
        Err(e) => out.push(run_check(
            "theorem",
            "R_theta~ = BH_{theta,psi,alpha}",
            || Err(e),
        )),
        Ok((exhaustive, ns, np, rep)) => {
            let mode = if exhaustive { "exhaustive" } else { "random" };
            let odd_bad = rep.odd_mismatches();
            let even_bad = rep.mismatches.len() - odd_bad;
            let first = |odd: bool| {
                rep.mismatches
                    .iter()
                    .find(|m| (m.det_order.rem_euclid(2) == 1) == odd)
                    .map(|m| {
                        format!(
                            "; first: {} at {} formula {} mackey {}",
                            m.character, m.g, m.formula, m.mackey
                        )
                    })
                    .unwrap_or_default()
            };
            out.push(run_check(
                "theorem_odd_det",
                "trace formula = Mackey trace on g with ord_F det g odd",
                || {
                    done(
                        odd_bad == 0 && rep.odd_checked > 0,
                        format!(
                            "{} comparisons ({mode}, {ns} elements, {np} characters) equal",
                            rep.odd_checked
                        ),
                        format!("{odd_bad} mismatches{}", first(true)),
                    )
                },
            ));
            out.push(run_check(
                "theorem_even_det",
                "trace formula = Mackey trace on g with ord_F det g even",
                || {
                    done(
                        even_bad == 0,
                        format!("{} comparisons equal", rep.even_checked),
                        format!("{even_bad} mismatches{}", first(false)),
                    )
                },
            ));
        }
    }
    // the comparison itself ran before the checks were assembled
    let ms = t0.elapsed().as_millis() as u64;
    for c in &mut out {
        c.elapsed_ms += ms / 2;
    }
    out
}

pub fn theorem_duality(ctx: &Ctx) -> Vec<Check> {
    let tw = &ctx.tw;
    let mut out = Vec::new();
    out.push(run_check(
        "alpha_extraction",
        "psi_{E,alpha}(x) = theta(1+x); q^d lifts give q^d classes alpha",
        || {
            let grp = &ctx.model()?.grp;
            let mut bad = Vec::new();
            let mut n = 0;
            for (theta, lifts) in ctx.sampled_thetas()? {
                let mut keys = HashSet::new();
                for chi in lifts {
                    n += 1;
                    let lam = extract_theta_psi_alpha(tw, grp, chi)?;
                    if !lam.theta.same_as(theta) {
                        bad.push(format!("{}: theta differs", chi));
                    }
                    if !compatibility_holds(tw, &lam)? {
                        bad.push(format!("{}: compatibility", chi));
                    }
                    if !beta_dual_round_trip(tw, grp, chi, &lam)? {
                        bad.push(format!("{}: round trip", chi));
                    }
                    if !diagram_commutes(tw, &lam.alpha)? {
                        bad.push(format!("{}: diagram", chi));
                    }
                    keys.insert(lam.alpha.key(tw)?);
                }
                if keys.len() != lifts.len() || lifts.len() as u64 != tw.q.pow(tw.d as u32) {
                    bad.push(format!(
                        "{} alpha classes for {} lifts",
                        keys.len(),
                        lifts.len()
                    ));
                }
            }
            done(
                bad.is_empty() && n > 0,
                format!("{n} lifts: compatible, distinct, round trip exact, diagram commutes"),
                if bad.is_empty() {
                    "all hold".to_string()
                } else {
                    bad.join("; ")
                },
            )
        },
    ));
    out.push(run_check(
        "pairings_perfect",
        "the three duality pairings are perfect",
        || {
            let r = dual_pairing_ranks(tw)?;
            done(r.all_perfect(), "square and full rank", format!("{r:?}"))
        },
    ));
    out.push(run_check(
        "psi_closed_form",
        "psi_{E,alpha}(z0 + pi eps z1) = psi(Delta(alpha1 z0 + alpha0 z1))",
        || {
            let mut rng = ctx.rng("psi_closed_form");
            let mut bad = 0;
            for _ in 0..ctx.effort.psi_samples {
                let a = AlphaSpec::random(tw, &mut rng)?;
                let z = tw.random_in_ideal(&mut rng, tw.n, tw.m + 1);
                if psi_e_alpha(tw, &a, &z)? != psi_e_alpha_closed(tw, &a, &z)? {
                    bad += 1;
                }
            }
            done(
                bad == 0,
                format!("{} samples agree", ctx.effort.psi_samples),
                format!("{bad} disagree"),
            )
        },
    ));
    out.push(run_check(
        "lambda_well_defined",
        "Lambda(iota(e) j) independent of the factorization",
        || {
            let pairs = theorem_pairs(ctx, false)?;
            let mut rng = ctx.rng("lambda_well_defined");
            let nd = tw.n + tw.d;
            let mut bad = 0;
            let per = ctx.effort.psi_samples.div_ceil(pairs.len().max(1));
            for (_, lam) in &pairs {
                for _ in 0..per {
                    let e = random_e_star(tw, &mut rng);
                    let j = random_iwahori_level(tw, &mut rng, nd);
                    let u = tw.random_unit_level(&mut rng, nd, tw.work());
                    let j2 = iota(tw, &u)?.inv()?.mul(&j);
                    let a = lambda_exponent_of(tw, lam, &e, &j)?;
                    let b = lambda_exponent_of(tw, lam, &e.mul(&u), &j2)?;
                    let h = iota(tw, &e)?.mul(&j);
                    let c = lambda_eval(tw, lam, &h)?;
                    if a != b || c != Cyclotomic::zeta_pow(lam.theta.order, a as i64) {
                        bad += 1;
                    }
                }
            }
            done(
                bad == 0,
                format!("{} refactorizations agree", per * pairs.len()),
                format!("{bad} disagree"),
            )
        },
    ));
    out.push(run_check(
        "lambda_basic_values",
        "Lambda(1) = 1, Lambda(iota(pi)) = theta(pi), trivial on I_F^{m+d+1}",
        || {
            let pairs = theorem_pairs(ctx, false)?;
            let mut rng = ctx.rng("lambda_basic_values");
            let mut bad = 0;
            for (_, lam) in &pairs {
                let one = Cyclotomic::one(lam.theta.order);
                if lambda_eval(tw, lam, &Mat2::identity(tw))? != one {
                    bad += 1;
                }
                if lambda_eval(tw, lam, &iota(tw, &tw.pi_pow(1))?)?
                    != lam.theta.eval(&tw.pi_pow(1))?
                {
                    bad += 1;
                }
                for _ in 0..20 {
                    let j = random_iwahori_level(tw, &mut rng, tw.m + tw.d + 1);
                    if lambda_eval(tw, lam, &j)? != one {
                        bad += 1;
                    }
                }
            }
            done(bad == 0, "all hold", format!("{bad} failures"))
        },
    ));
    out.push(run_check(
        "mackey_identity_and_center",
        "Mackey trace at 1 is the index, at w it is theta(w) times it",
        || {
            let pairs = theorem_pairs(ctx, false)?;
            let dim = expected_dimension(tw);
            let wg = GNormalized::new(tw, &Mat2::identity(tw).scale(&tw.varpi))?;
            let mut bad = 0;
            for (_, lam) in &pairs {
                let o = lam.theta.order;
                if mackey_trace(tw, &GNormalized::identity(tw), lam)?
                    != Cyclotomic::from_int(o, dim)
                {
                    bad += 1;
                }
                if mackey_trace(tw, &wg, lam)? != lam.theta.eval(&tw.varpi)?.scale(&dim.into()) {
                    bad += 1;
                }
            }
            done(bad == 0, format!("index {dim}"), format!("{bad} failures"))
        },
    ));
    out
}

pub fn theorem_suite(ctx: &Ctx) -> Vec<Check> {
    let mut out = theorem_main(ctx);
    out.extend(theorem_duality(ctx));
    out
}

pub fn run_suite(ctx: &Ctx, kind: SuiteKind) -> SuiteResult {
    let checks = match kind {
        SuiteKind::Tower => tower_suite(ctx),
        SuiteKind::Groups => groups_suite(ctx),
        SuiteKind::Points => points_suite(ctx),
        SuiteKind::Traces => traces_suite(ctx),
        SuiteKind::Theorem => theorem_suite(ctx),
    };
    SuiteResult {
        name: kind.name().to_string(),
        checks,
    }
}

/// Run the selected suites in dependency order.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let ctx = Ctx::new(cfg)?;
    let mut kinds = cfg.suites.clone();
    kinds.sort();
    kinds.dedup();
    let suites: Vec<SuiteResult> = kinds.iter().map(|&k| run_suite(&ctx, k)).collect();
    let pass = suites.iter().all(SuiteResult::passed);
    Ok(Report {
        params: ParamsEcho {
            f: ctx.tw.f,
            q: ctx.tw.q,
            d: ctx.tw.d,
            n: ctx.tw.n,
            m: ctx.tw.m,
            precision: ctx.tw.work(),
            seed: cfg.seed,
        },
        suites,
        pass,
    })
}

/// The check body for formula counts on many elements, exposed for the
/// command-line trace listing.
pub fn trace_rows(
    ctx: &Ctx,
    chi: &CharacterSpec,
    gs: &[GNormalized],
) -> Result<Vec<(Cyclotomic, Cyclotomic)>> {
    let model = ctx.model()?;
    let counts = formula_counts_many(&ctx.tw, &model.grp, gs)?;
    counts
        .iter()
        .zip(gs)
        .map(|(fc, g)| {
            let oc = model.oracle_counts(&ctx.tw, g)?;
            Ok((fc.evaluate(&model.grp, chi)?, oc.evaluate(&model.grp, chi)?))
        })
        .collect()
}

pub fn sample_g(ctx: &Ctx, count: usize) -> Result<Vec<GNormalized>> {
    let mut rng = ctx.rng("trace_samples");
    (0..count).map(|_| random_g(&ctx.tw, &mut rng)).collect()
}

/// Extract Lambda for a character given by index among all characters.
pub fn lambda_for(ctx: &Ctx, chi: &CharacterSpec) -> Result<LambdaSpec> {
    extract_theta_psi_alpha(&ctx.tw, &ctx.model()?.grp, chi)
}

/// Samples for the theorem command.
pub fn theorem_samples(ctx: &Ctx, exhaustive: bool, count: usize) -> Result<Vec<GNormalized>> {
    if exhaustive {
        exhaustive_samples(&ctx.tw, &[1, 0])
    } else {
        let mut rng = ctx.rng("theorem_samples");
        random_samples(&ctx.tw, &mut rng, count)
    }
}

pub fn point_line(tw: &Tower, p: &crate::adlv::AdlvPoint) -> String {
    let amod = tw.n + tw.d + tw.m + 1;
    format!(
        "a={} C={}",
        p.a.rep().coeff_string(1, amod),
        p.c.rep().coeff_string(0, tw.m + 1)
    )
}
