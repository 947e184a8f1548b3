//! Characters of the abelianized group i(pi,0)^Z x torsion and of its
//! diagonal subgroup E^x/U^{m+1}.

use super::abelian::{abelian_structure, AbelianStructure};
use super::cyclotomic::Cyclotomic;
use crate::algebra::{Series, Uniformizer};
use crate::error::{Error, Result};
use crate::groups::{enumerate_torsion, GammaBarElem};
use crate::tower::{EStarClass, Tower, UnitClass};
use std::collections::HashMap;
use std::fmt;

/// The torsion part of the abelianization with its basis and dlog table.
pub struct TorsionGroup {
    elems: Vec<GammaBarElem>,
    index: HashMap<(u128, u128), usize>,
    structure: AbelianStructure,
}

fn key_of(g: &GammaBarElem) -> (u128, u128) {
    (g.t.u.key(), g.rbar.key())
}

impl TorsionGroup {
    pub fn build(tw: &Tower) -> Result<Self> {
        let elems = enumerate_torsion(tw);
        let index: HashMap<(u128, u128), usize> = elems
            .iter()
            .enumerate()
            .map(|(i, g)| (key_of(g), i))
            .collect();
        let identity = index[&key_of(&GammaBarElem::identity(tw))];
        let law = |a: usize, b: usize| -> Result<usize> {
            let p = elems[a].mul(&elems[b], tw);
            if p.t.v != 0 {
                return Err(Error::Structure(
                    "torsion product left the unit part".into(),
                ));
            }
            index
                .get(&key_of(&p))
                .copied()
                .ok_or_else(|| Error::Structure("torsion product not in the element list".into()))
        };
        let structure = abelian_structure(elems.len(), identity, &law)?;
        Ok(TorsionGroup {
            elems,
            index,
            structure,
        })
    }

    pub fn size(&self) -> usize {
        self.elems.len()
    }

    pub fn elements(&self) -> &[GammaBarElem] {
        &self.elems
    }

    pub fn structure(&self) -> &AbelianStructure {
        &self.structure
    }

    pub fn orders(&self) -> &[u64] {
        &self.structure.orders
    }

    pub fn exponent(&self) -> u64 {
        self.structure.exponent()
    }

    pub fn basis_elements(&self) -> Vec<GammaBarElem> {
        self.structure
            .basis
            .iter()
            .map(|&i| self.elems[i].clone())
            .collect()
    }

    /// Index of a torsion element (t a unit).
    pub fn index_of(&self, g: &GammaBarElem) -> Result<usize> {
        if g.t.v != 0 {
            return Err(Error::Domain("element has a nonzero free part".into()));
        }
        self.index
            .get(&key_of(g))
            .copied()
            .ok_or_else(|| Error::Domain(format!("{g:?} is not a torsion class")))
    }

    pub fn dlog(&self, idx: usize) -> &[u64] {
        &self.structure.dlog[idx]
    }

    /// Index of the diagonal element i(u, 0).
    pub fn diagonal_index(&self, u: &UnitClass, tw: &Tower) -> Result<usize> {
        let g = GammaBarElem {
            t: EStarClass::from_unit(u.clone()),
            rbar: crate::tower::AddClass::zero(tw.f, 0, tw.d),
        };
        self.index_of(&g)
    }

    /// Number of characters with the default value on i(pi, 0).
    pub fn character_count(&self) -> usize {
        self.size()
    }

    /// The character with enumeration index `idx`, taking value
    /// zeta_M^{pi_exponent} on i(pi, 0). Torsion exponents run in
    /// mixed radix over the basis orders, first basis element fastest.
    pub fn character(&self, idx: usize, pi_exponent: u64) -> Result<CharacterSpec> {
        if idx >= self.size() {
            return Err(Error::Usage(format!(
                "character index {idx} out of range (there are {})",
                self.size()
            )));
        }
        let m = self.exponent();
        let mut rest = idx as u64;
        let mut exps = Vec::with_capacity(self.orders().len());
        for &o in self.orders() {
            exps.push((rest % o) * (m / o));
            rest /= o;
        }
        CharacterSpec::new(m, pi_exponent % m, exps, self)
    }

    pub fn characters(&self, pi_exponent: u64) -> Vec<CharacterSpec> {
        (0..self.size())
            .map(|i| self.character(i, pi_exponent).expect("index in range"))
            .collect()
    }

    /// Exponent of zeta_M for the element i(pi,0)^k * torsion.
    pub fn eval_exponent(&self, chi: &CharacterSpec, g: &GammaBarElem) -> Result<u64> {
        let (k, tors) = g.split_free();
        let idx = self.index_of(&tors)?;
        Ok(chi.exponent_at(k, idx, self))
    }

    pub fn eval(&self, chi: &CharacterSpec, g: &GammaBarElem) -> Result<Cyclotomic> {
        let e = self.eval_exponent(chi, g)?;
        Ok(Cyclotomic::zeta_pow(chi.order, e as i64))
    }

    /// Restriction to the diagonal subgroup E^x/U^{m+1}.
    pub fn restrict(&self, chi: &CharacterSpec, tw: &Tower) -> Result<DiagCharacter> {
        let mut unit_exps = HashMap::new();
        for u in UnitClass::enumerate(tw.f, tw.m + 1) {
            let idx = self.diagonal_index(&u, tw)?;
            unit_exps.insert(u.key(), chi.exponent_at(0, idx, self));
        }
        Ok(DiagCharacter {
            order: chi.order,
            pi_exponent: chi.pi_exponent,
            modulus: tw.m + 1,
            unit_exps,
        })
    }

    /// All lifts of theta to the abelianization.
    pub fn lift_characters(&self, theta: &DiagCharacter, tw: &Tower) -> Result<Vec<CharacterSpec>> {
        if theta.modulus != tw.m + 1 {
            return Err(Error::Character(format!(
                "character is defined modulo U^{}, expected U^{}",
                theta.modulus,
                tw.m + 1
            )));
        }
        let order = num_integer::lcm(theta.order, self.exponent());
        let mut out = Vec::new();
        for chi in self.characters(0) {
            let mut chi = chi.with_order(order)?;
            chi.pi_exponent = theta.pi_exponent * (order / theta.order);
            let r = self.restrict(&chi, tw)?;
            if r.same_as(theta) {
                out.push(chi);
            }
        }
        Ok(out)
    }

    /// The distinct diagonal characters of exact level m.
    pub fn generic_thetas(&self, tw: &Tower, pi_exponent: u64) -> Result<Vec<DiagCharacter>> {
        let mut out: Vec<DiagCharacter> = Vec::new();
        for chi in self.characters(pi_exponent) {
            let r = self.restrict(&chi, tw)?;
            if r.level(tw) == tw.m && !out.iter().any(|o| o.same_as(&r)) {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Characters whose diagonal restriction has level exactly m.
    pub fn generic_characters(
        &self,
        tw: &Tower,
        pi_exponent: u64,
    ) -> Result<Vec<(usize, CharacterSpec)>> {
        let mut out = Vec::new();
        for (i, chi) in self.characters(pi_exponent).into_iter().enumerate() {
            if self.restrict(&chi, tw)?.level(tw) == tw.m {
                out.push((i, chi));
            }
        }
        Ok(out)
    }
}

/// A character of the abelianization: zeta_M^{pi_exponent} on i(pi,0)
/// and zeta_M^{torsion_exponents[i]} on the i-th basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterSpec {
    pub order: u64,
    pub pi_exponent: u64,
    pub torsion_exponents: Vec<u64>,
}

impl CharacterSpec {
    pub fn new(
        order: u64,
        pi_exponent: u64,
        torsion_exponents: Vec<u64>,
        grp: &TorsionGroup,
    ) -> Result<Self> {
        let spec = CharacterSpec {
            order,
            pi_exponent,
            torsion_exponents,
        };
        spec.validate(grp)?;
        Ok(spec)
    }

    pub fn trivial(grp: &TorsionGroup) -> Self {
        CharacterSpec {
            order: grp.exponent(),
            pi_exponent: 0,
            torsion_exponents: vec![0; grp.orders().len()],
        }
    }

    pub fn validate(&self, grp: &TorsionGroup) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Character(
                "root-of-unity order must be positive".into(),
            ));
        }
        if self.torsion_exponents.len() != grp.orders().len() {
            return Err(Error::Character(format!(
                "expected {} torsion exponents, got {}",
                grp.orders().len(),
                self.torsion_exponents.len()
            )));
        }
        for (&e, &o) in self.torsion_exponents.iter().zip(grp.orders()) {
            if !(o as u128 * e as u128).is_multiple_of(self.order as u128) {
                return Err(Error::Character(format!(
                    "exponent {e} on a basis element of order {o} is not a character mod {}",
                    self.order
                )));
            }
        }
        Ok(())
    }

    /// Re-express the same character with values in mu_{new_order}.
    pub fn with_order(&self, new_order: u64) -> Result<Self> {
        if !new_order.is_multiple_of(self.order) {
            return Err(Error::Character(format!(
                "cannot embed mu_{} into mu_{new_order}",
                self.order
            )));
        }
        let s = new_order / self.order;
        Ok(CharacterSpec {
            order: new_order,
            pi_exponent: self.pi_exponent * s,
            torsion_exponents: self.torsion_exponents.iter().map(|e| e * s).collect(),
        })
    }

    fn exponent_at(&self, k: i64, idx: usize, grp: &TorsionGroup) -> u64 {
        let m = self.order as i128;
        let mut acc = (k as i128 * self.pi_exponent as i128).rem_euclid(m);
        for (&x, &e) in grp.dlog(idx).iter().zip(&self.torsion_exponents) {
            acc = (acc + x as i128 * e as i128) % m;
        }
        acc as u64
    }

    /// Exponent of the value on the torsion element with index `idx`.
    pub fn torsion_exponent_of(&self, idx: usize, grp: &TorsionGroup) -> u64 {
        self.exponent_at(0, idx, grp)
    }

    /// Pointwise inverse.
    pub fn inverse(&self) -> CharacterSpec {
        let m = self.order;
        CharacterSpec {
            order: m,
            pi_exponent: (m - self.pi_exponent % m) % m,
            torsion_exponents: self
                .torsion_exponents
                .iter()
                .map(|e| (m - e % m) % m)
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let ex: Vec<String> = self
            .torsion_exponents
            .iter()
            .map(|e| e.to_string())
            .collect();
        format!(
            "order {}\npi_exponent {}\ntorsion_exponents {}\n",
            self.order,
            self.pi_exponent,
            ex.join(",")
        )
    }

    pub fn parse(text: &str, grp: &TorsionGroup) -> Result<Self> {
        let mut order = None;
        let mut pi = None;
        let mut tors = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, val) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Usage(format!("malformed character line `{line}`")))?;
            let val = val.trim();
            let num = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Usage(format!("`{s}` is not a non-negative integer")))
            };
            match key {
                "order" => order = Some(num(val)?),
                "pi_exponent" => pi = Some(num(val)?),
                "torsion_exponents" => {
                    let v: Result<Vec<u64>> = if val.is_empty() {
                        Ok(vec![])
                    } else {
                        val.split(',').map(num).collect()
                    };
                    tors = Some(v?)
                }
                _ => return Err(Error::Usage(format!("unknown character field `{key}`"))),
            }
        }
        let order = order.ok_or_else(|| Error::Usage("missing `order`".into()))?;
        let pi = pi.unwrap_or(0);
        let tors = tors.ok_or_else(|| Error::Usage("missing `torsion_exponents`".into()))?;
        CharacterSpec::new(order, pi % order.max(1), tors, grp)
    }
}

impl fmt::Display for CharacterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "order={} pi_exponent={} torsion={:?}",
            self.order, self.pi_exponent, self.torsion_exponents
        )
    }
}

/// A character of E^x/U^{m+1}: zeta_M^{pi_exponent} on pi and a table of
/// exponents on unit classes.
#[derive(Clone, Debug)]
pub struct DiagCharacter {
    pub order: u64,
    pub pi_exponent: u64,
    modulus: i64,
    unit_exps: HashMap<u128, u64>,
}

impl DiagCharacter {
    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    fn normalized(&self, order: u64) -> (u64, Vec<(u128, u64)>) {
        let s = order / self.order;
        let mut v: Vec<(u128, u64)> = self.unit_exps.iter().map(|(&k, &e)| (k, e * s)).collect();
        v.sort();
        (self.pi_exponent * s, v)
    }

    pub fn same_as(&self, o: &DiagCharacter) -> bool {
        let l = num_integer::lcm(self.order, o.order);
        self.modulus == o.modulus && self.normalized(l) == o.normalized(l)
    }

    /// Exponent on a unit class.
    pub fn unit_exponent(&self, u: &UnitClass) -> Result<u64> {
        if u.modulus() != self.modulus {
            return Err(Error::Character("unit class of the wrong level".into()));
        }
        self.unit_exps
            .get(&u.key())
            .copied()
            .ok_or_else(|| Error::Character("unit class missing from the table".into()))
    }

    /// Exponent on an element of E^x known to precision >= modulus.
    pub fn exponent_of(&self, x: &Series) -> Result<u64> {
        let v = x.ord()?;
        let u = UnitClass::new(&x.shift(-v), self.modulus)?;
        let e = self.unit_exponent(&u)? as i128 + v as i128 * self.pi_exponent as i128;
        Ok(e.rem_euclid(self.order as i128) as u64)
    }

    pub fn eval(&self, x: &Series) -> Result<Cyclotomic> {
        Ok(Cyclotomic::zeta_pow(
            self.order,
            self.exponent_of(x)? as i64,
        ))
    }

    /// Largest k with theta(1 + c pi^k) != 1 for some c in an F_2-basis of
    /// the residue field; 0 if theta is trivial on U^1.
    pub fn level(&self, tw: &Tower) -> i64 {
        let mut level = 0;
        for k in 1..self.modulus {
            for b in 0..tw.f {
                let c = Series::from_bits(tw.f, Uniformizer::Pi, k, &[1 << b], self.modulus);
                let u = UnitClass::new(&tw.one().add(&c), self.modulus).expect("unit");
                if self.unit_exponent(&u).expect("in table") != 0 {
                    level = k;
                }
            }
        }
        level
    }

    pub fn is_trivial_on_units(&self) -> bool {
        self.unit_exps.values().all(|&e| e == 0)
    }
}

/// Generic: the diagonal restriction has level exactly m.
pub fn is_generic(grp: &TorsionGroup, chi: &CharacterSpec, tw: &Tower) -> Result<bool> {
    Ok(grp.restrict(chi, tw)?.level(tw) == tw.m)
}

pub fn char_level(theta: &DiagCharacter, tw: &Tower) -> i64 {
    theta.level(tw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerParams;

    #[test]
    fn smallest_parameters() {
        let tw = Tower::build(&TowerParams::new(1, 1, 1)).unwrap();
        let g = TorsionGroup::build(&tw).unwrap();
        assert_eq!(g.size(), 8);
        let generic = g.generic_thetas(&tw, 1).unwrap();
        assert_eq!(generic.len(), 2);
        for th in &generic {
            let lifts = g.lift_characters(th, &tw).unwrap();
            assert_eq!(lifts.len(), 2);
        }
        let triv = CharacterSpec::trivial(&g);
        assert_eq!(g.restrict(&triv, &tw).unwrap().level(&tw), 0);
    }

    #[test]
    fn text_round_trip() {
        let tw = Tower::build(&TowerParams::new(1, 1, 1)).unwrap();
        let g = TorsionGroup::build(&tw).unwrap();
        for chi in g.characters(1) {
            assert_eq!(CharacterSpec::parse(&chi.to_text(), &g).unwrap(), chi);
        }
    }
}
