//! Structure of a finite abelian group given by an element list and a law.
//!
//! Generators are picked greedily, the relation lattice is read off a
//! breadth-first search of the Cayley graph, and a Smith normal form of
//! the (Hermite-reduced) relation matrix yields a basis with invariant
//! factors.

use crate::error::{Error, Result};
use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct AbelianStructure {
    /// Element indices of the basis.
    pub basis: Vec<usize>,
    /// Orders of the basis elements, each dividing the next.
    pub orders: Vec<u64>,
    /// Exponent vector of every element with respect to the basis.
    pub dlog: Vec<Vec<u64>>,
    pub identity: usize,
}

impl AbelianStructure {
    pub fn size(&self) -> usize {
        self.dlog.len()
    }

    pub fn exponent(&self) -> u64 {
        self.orders.iter().copied().fold(1, num_integer::lcm)
    }
}

fn span(
    n: usize,
    identity: usize,
    gens: &[usize],
    mul: &dyn Fn(usize, usize) -> Result<usize>,
) -> Result<Vec<bool>> {
    let mut seen = vec![false; n];
    seen[identity] = true;
    let mut queue = VecDeque::from([identity]);
    while let Some(e) = queue.pop_front() {
        for &g in gens {
            let x = mul(e, g)?;
            if x >= n {
                return Err(Error::Structure("law leaves the element list".into()));
            }
            if !seen[x] {
                seen[x] = true;
                queue.push_back(x);
            }
        }
    }
    Ok(seen)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Insert a relation into an upper-triangular basis of the lattice,
/// keeping non-pivot entries reduced modulo `bound`.
fn insert_relation(rows: &mut [Option<Vec<i128>>], mut r: Vec<i128>, bound: i128) {
    let s = r.len();
    for c in 0..s {
        for (k, x) in r.iter_mut().enumerate() {
            if k > c {
                *x = x.rem_euclid(bound);
            }
        }
        if r[c] == 0 {
            continue;
        }
        match rows[c].take() {
            None => {
                if r[c] < 0 {
                    r.iter_mut().for_each(|x| *x = -*x);
                }
                rows[c] = Some(r);
                return;
            }
            Some(b) => {
                let (g, x, y) = ext_gcd(b[c], r[c]);
                let (bc, rc) = (b[c] / g, r[c] / g);
                let mut nb: Vec<i128> = b.iter().zip(&r).map(|(p, q)| x * p + y * q).collect();
                let nr: Vec<i128> = b.iter().zip(&r).map(|(p, q)| rc * p - bc * q).collect();
                for (k, v) in nb.iter_mut().enumerate() {
                    if k > c {
                        *v = v.rem_euclid(bound);
                    }
                }
                rows[c] = Some(nb);
                r = nr;
            }
        }
    }
}

/// Smith normal form of a square matrix; returns the diagonal and the
/// inverse of the accumulated column transform.
fn smith(mut a: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>) {
    let s = a.len();
    let mut w: Vec<Vec<i128>> = (0..s)
        .map(|i| (0..s).map(|j| i128::from(i == j)).collect())
        .collect();
    for k in 0..s {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in k..s {
                for j in k..s {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(k, pi);
            if pj != k {
                for row in a.iter_mut() {
                    row.swap(k, pj);
                }
                w.swap(k, pj);
            }
            let mut clean = true;
            for i in (k + 1)..s {
                let q = a[i][k] / a[k][k];
                if q != 0 {
                    let pivot_row = a[k].clone();
                    for (x, y) in a[i].iter_mut().zip(pivot_row.iter()) {
                        *x -= q * y;
                    }
                }
                if a[i][k] != 0 {
                    clean = false;
                }
            }
            for j in (k + 1)..s {
                let q = a[k][j] / a[k][k];
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[k];
                    }
                    // column_j -= q column_k, so row_k(W) += q row_j(W)
                    let wj = w[j].clone();
                    for (x, y) in w[k].iter_mut().zip(wj.iter()) {
                        *x += q * y;
                    }
                }
                if a[k][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                let piv = a[k][k];
                let bad = ((k + 1)..s).find(|&i| ((k + 1)..s).any(|j| a[i][j] % piv != 0));
                match bad {
                    Some(i) => {
                        let ri = a[i].clone();
                        for (x, y) in a[k].iter_mut().zip(ri.iter()) {
                            *x += y;
                        }
                    }
                    None => break,
                }
            }
        }
    }
    ((0..s).map(|i| a[i][i].abs()).collect(), w)
}

fn power(
    mut base: usize,
    mut e: u64,
    identity: usize,
    mul: &dyn Fn(usize, usize) -> Result<usize>,
) -> Result<usize> {
    let mut acc = identity;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base)?;
        }
        base = mul(base, base)?;
        e >>= 1;
    }
    Ok(acc)
}

/// Compute a basis and discrete-log table of the group on elements
/// 0..n with the given identity and law.
pub fn abelian_structure(
    n: usize,
    identity: usize,
    mul: &dyn Fn(usize, usize) -> Result<usize>,
) -> Result<AbelianStructure> {
    if identity >= n {
        return Err(Error::Structure("identity outside the element list".into()));
    }
    let mut gens: Vec<usize> = Vec::new();
    let mut covered = span(n, identity, &gens, mul)?;
    for e in 0..n {
        if !covered[e] {
            gens.push(e);
            covered = span(n, identity, &gens, mul)?;
        }
    }
    for (i, &a) in gens.iter().enumerate() {
        for &b in &gens[i + 1..] {
            if mul(a, b)? != mul(b, a)? {
                return Err(Error::Structure("the law is not commutative".into()));
            }
        }
    }
    let s = gens.len();
    if s == 0 {
        return Ok(AbelianStructure {
            basis: vec![],
            orders: vec![],
            dlog: vec![vec![]; n],
            identity,
        });
    }
    let bound = n as i128;
    let mut rows: Vec<Option<Vec<i128>>> = vec![None; s];
    for i in 0..s {
        let mut r = vec![0i128; s];
        r[i] = bound;
        insert_relation(&mut rows, r, bound);
    }
    let mut vecs: Vec<Option<Vec<i128>>> = vec![None; n];
    vecs[identity] = Some(vec![0; s]);
    let mut queue = VecDeque::from([identity]);
    while let Some(e) = queue.pop_front() {
        let ve = vecs[e].clone().expect("visited");
        for (i, &g) in gens.iter().enumerate() {
            let x = mul(e, g)?;
            let mut cand = ve.clone();
            cand[i] += 1;
            match &vecs[x] {
                None => {
                    vecs[x] = Some(cand);
                    queue.push_back(x);
                }
                Some(vx) => {
                    let rel: Vec<i128> = cand.iter().zip(vx).map(|(a, b)| a - b).collect();
                    if rel.iter().any(|&c| c != 0) {
                        insert_relation(&mut rows, rel, bound);
                    }
                }
            }
        }
    }
    if vecs.iter().any(|v| v.is_none()) {
        return Err(Error::Structure(
            "generators do not reach every element".into(),
        ));
    }
    let h: Vec<Vec<i128>> = rows.into_iter().map(|r| r.expect("full rank")).collect();
    let (diag, w) = smith(h);
    let mut basis = Vec::new();
    let mut orders = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        if d == 1 {
            continue;
        }
        let mut elem = identity;
        for (j, &g) in gens.iter().enumerate() {
            let e = w[i][j].rem_euclid(bound) as u64;
            elem = mul(elem, power(g, e, identity, mul)?)?;
        }
        basis.push(elem);
        orders.push(d as u64);
    }
    let total: u128 = orders.iter().map(|&o| o as u128).product();
    if total != n as u128 {
        return Err(Error::Structure(format!(
            "invariant factors multiply to {total}, expected {n}"
        )));
    }
    // discrete logarithms by mixed-radix enumeration
    let mut dlog: Vec<Option<Vec<u64>>> = vec![None; n];
    let k = basis.len();
    let mut exps = vec![0u64; k];
    let mut elem = identity;
    loop {
        if dlog[elem].is_some() {
            return Err(Error::Structure(
                "basis elements are not independent".into(),
            ));
        }
        dlog[elem] = Some(exps.clone());
        let mut i = 0;
        loop {
            if i == k {
                break;
            }
            exps[i] += 1;
            elem = mul(elem, basis[i])?;
            if exps[i] < orders[i] {
                break;
            }
            // wrapped: b_i^{order} = 1, so elem is already reset in coordinate i
            exps[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    let dlog: Vec<Vec<u64>> = dlog
        .into_iter()
        .map(|d| d.ok_or_else(|| Error::Structure("element missing from the dlog table".into())))
        .collect::<Result<_>>()?;
    Ok(AbelianStructure {
        basis,
        orders,
        dlog,
        identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_and_products() {
        // Z/4 x Z/6 ~ Z/2 x Z/12
        let n = 24;
        let mul = |a: usize, b: usize| -> Result<usize> {
            let (a1, a2) = (a / 6, a % 6);
            let (b1, b2) = (b / 6, b % 6);
            Ok(((a1 + b1) % 4) * 6 + (a2 + b2) % 6)
        };
        let s = abelian_structure(n, 0, &mul).unwrap();
        assert_eq!(s.orders, vec![2, 12]);
        assert_eq!(s.exponent(), 12);
        for a in 0..n {
            for b in 0..n {
                let c = mul(a, b).unwrap();
                for (i, &o) in s.orders.iter().enumerate() {
                    assert_eq!((s.dlog[a][i] + s.dlog[b][i]) % o, s.dlog[c][i]);
                }
            }
        }
    }

    #[test]
    fn non_abelian_rejected() {
        // S3 as permutations indexed 0..6
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let mul = |a: usize, b: usize| -> Result<usize> {
            let p = perms[a];
            let q = perms[b];
            let r = [p[q[0]], p[q[1]], p[q[2]]];
            Ok(perms.iter().position(|x| *x == r).unwrap())
        };
        assert!(abelian_structure(6, 0, &mul).is_err());
    }
}
