//! Best-effort fraction reduction by multivariate polynomial gcd.
//!
//! Generalized polynomials are mapped onto ordinary multivariate polynomials
//! over Q: an atom with a positive integer exponent becomes a variable with
//! that degree; every other atom power (fractional, symbolic or negative
//! exponent) becomes an opaque degree-one marker variable. The gcd is
//! computed with a primitive pseudo-remainder sequence and verified by exact
//! division, so a found divisor is always genuine. Factors hidden behind
//! markers are simply not found; reduction is best-effort and zero tests
//! never depend on it (subtraction cross-multiplies).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{Atom, Expo, Monomial, Poly, Rat};

/// Work budget for the gcd search; exceeding it abandons reduction.
const BUDGET: i64 = 200_000;

/// Hard caps keeping pathological inputs away from the gcd machinery.
const MAX_TERMS: usize = 600;
const MAX_VARS: usize = 24;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum MapKey {
    /// Atom occurring with positive integer exponents; degree = exponent.
    IntAtom(Atom),
    /// Opaque (atom, exponent) pair treated as an independent unknown.
    Marker(Atom, Expo),
}

/// Ordinary multivariate polynomial: exponent vector -> coefficient.
type MPoly = BTreeMap<Vec<u32>, Rat>;

struct Mapping {
    vars: Vec<MapKey>,
}

impl Mapping {
    fn build(polys: &[&Poly]) -> Option<Mapping> {
        let mut keys: alloc::collections::BTreeSet<MapKey> = Default::default();
        for p in polys {
            for m in p.terms.keys() {
                for (a, e) in &m.powers {
                    match e {
                        Expo::Int(k) if *k >= 1 => {
                            keys.insert(MapKey::IntAtom(a.clone()));
                        }
                        _ => {
                            keys.insert(MapKey::Marker(a.clone(), e.clone()));
                        }
                    }
                }
            }
        }
        if keys.len() > MAX_VARS {
            return None;
        }
        Some(Mapping { vars: keys.into_iter().collect() })
    }

    fn index(&self, key: &MapKey) -> usize {
        self.vars.binary_search(key).expect("key registered during build")
    }

    fn to_mpoly(&self, p: &Poly) -> MPoly {
        let mut out = MPoly::new();
        for (m, c) in &p.terms {
            let mut exps = alloc::vec![0u32; self.vars.len()];
            for (a, e) in &m.powers {
                match e {
                    Expo::Int(k) if *k >= 1 => {
                        exps[self.index(&MapKey::IntAtom(a.clone()))] += *k as u32;
                    }
                    _ => {
                        exps[self.index(&MapKey::Marker(a.clone(), e.clone()))] += 1;
                    }
                }
            }
            *out.entry(exps).or_insert_with(Rat::zero) += c.clone();
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn to_poly(&self, mp: &MPoly) -> Poly {
        let mut out = Poly::zero();
        for (exps, c) in mp {
            let mut powers: BTreeMap<Atom, Expo> = BTreeMap::new();
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (atom, expo) = match &self.vars[i] {
                    MapKey::IntAtom(a) => (a.clone(), Expo::Int(e as i64)),
                    MapKey::Marker(a, x) => (a.clone(), x.mul(&Expo::Int(e as i64))),
                };
                let merged = match powers.remove(&atom) {
                    None => expo,
                    Some(prev) => prev.add(&expo),
                };
                if !merged.is_zero() {
                    powers.insert(atom, merged);
                }
            }
            out = out.add(&Poly::monomial(Monomial { powers }, c.clone()));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// MPoly arithmetic
// ---------------------------------------------------------------------------

fn mp_is_const(p: &MPoly) -> bool {
    p.len() <= 1 && p.keys().all(|e| e.iter().all(|&x| x == 0))
}

fn mp_add_term(p: &mut MPoly, e: Vec<u32>, c: Rat) {
    if c.is_zero() {
        return;
    }
    use alloc::collections::btree_map::Entry;
    match p.entry(e) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let s = o.get().clone() + c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

fn mp_mul(a: &MPoly, b: &MPoly, budget: &mut i64) -> Option<MPoly> {
    *budget -= (a.len() * b.len()) as i64;
    if *budget < 0 {
        return None;
    }
    let mut out = MPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            mp_add_term(&mut out, e, ca.clone() * cb.clone());
        }
    }
    Some(out)
}

fn mp_sub(a: &MPoly, b: &MPoly) -> MPoly {
    let mut out = a.clone();
    for (e, c) in b {
        mp_add_term(&mut out, e.clone(), -c.clone());
    }
    out
}

fn mp_scale(a: &MPoly, c: &Rat) -> MPoly {
    a.iter().map(|(e, k)| (e.clone(), k.clone() * c.clone())).collect()
}

/// Exact division; `None` when `b` does not divide `a`.
fn mp_div_exact(a: &MPoly, b: &MPoly, budget: &mut i64) -> Option<MPoly> {
    if b.is_empty() {
        return None;
    }
    let (lb_e, lb_c) = b.iter().next_back().expect("nonzero divisor");
    let mut rem = a.clone();
    let mut q = MPoly::new();
    while !rem.is_empty() {
        *budget -= b.len() as i64;
        if *budget < 0 {
            return None;
        }
        let (lr_e, lr_c) = rem.iter().next_back().expect("nonempty");
        let mut qe = Vec::with_capacity(lr_e.len());
        for (x, y) in lr_e.iter().zip(lb_e) {
            if x < y {
                return None;
            }
            qe.push(x - y);
        }
        let qc = lr_c.clone() / lb_c.clone();
        let mut shift = MPoly::new();
        shift.insert(qe.clone(), qc.clone());
        rem = mp_sub(&rem, &mp_mul(b, &shift, budget)?);
        mp_add_term(&mut q, qe, qc);
    }
    Some(q)
}

fn mp_deg(p: &MPoly, v: usize) -> u32 {
    p.keys().map(|e| e[v]).max().unwrap_or(0)
}

/// Univariate view in `v`: degree -> coefficient polynomial (with the `v`
/// slot zeroed).
fn mp_uni(p: &MPoly, v: usize) -> BTreeMap<u32, MPoly> {
    let mut out: BTreeMap<u32, MPoly> = BTreeMap::new();
    for (e, c) in p {
        let d = e[v];
        let mut e0 = e.clone();
        e0[v] = 0;
        mp_add_term(out.entry(d).or_default(), e0, c.clone());
    }
    out.retain(|_, c| !c.is_empty());
    out
}

fn mp_from_uni(uni: &BTreeMap<u32, MPoly>, v: usize) -> MPoly {
    let mut out = MPoly::new();
    for (d, coeff) in uni {
        for (e, c) in coeff {
            let mut e1 = e.clone();
            e1[v] += d;
            mp_add_term(&mut out, e1, c.clone());
        }
    }
    out
}

/// Normalizes to rational-content 1 with positive leading coefficient.
fn mp_normalize(p: &MPoly) -> MPoly {
    if p.is_empty() {
        return p.clone();
    }
    let mut num_gcd = num_bigint::BigInt::zero();
    let mut den_lcm = num_bigint::BigInt::one();
    for c in p.values() {
        num_gcd = num_integer::Integer::gcd(&num_gcd, c.numer());
        den_lcm = num_integer::Integer::lcm(&den_lcm, c.denom());
    }
    let mut content = Rat::new(num_gcd, den_lcm);
    if p.iter().next_back().expect("nonzero").1.is_negative() {
        content = -content;
    }
    mp_scale(p, &(Rat::one() / content))
}

/// Content of the univariate view (gcd of the coefficients) and primitive
/// part.
fn mp_content_pp(
    p: &MPoly,
    v: usize,
    budget: &mut i64,
) -> Option<(MPoly, BTreeMap<u32, MPoly>)> {
    let uni = mp_uni(p, v);
    let mut cont: Option<MPoly> = None;
    for coeff in uni.values() {
        cont = Some(match cont {
            None => mp_normalize(coeff),
            Some(c) => mp_gcd(&c, coeff, budget)?,
        });
        if let Some(c) = &cont {
            if mp_is_const(c) {
                break;
            }
        }
    }
    let cont = cont.expect("nonzero polynomial");
    let cont = if mp_is_const(&cont) {
        let mut one = MPoly::new();
        one.insert(alloc::vec![0; p.keys().next().map(|e| e.len()).unwrap_or(0)], Rat::one());
        one
    } else {
        cont
    };
    let mut pp = BTreeMap::new();
    for (d, coeff) in &uni {
        let q = mp_div_exact(coeff, &cont, budget)?;
        pp.insert(*d, q);
    }
    Some((cont, pp))
}

/// Primitive multivariate gcd via pseudo-remainder sequences. `None` means
/// the work budget ran out (callers then skip reduction).
fn mp_gcd(a: &MPoly, b: &MPoly, budget: &mut i64) -> Option<MPoly> {
    *budget -= (a.len() + b.len()) as i64;
    if *budget < 0 {
        return None;
    }
    let nvars = a
        .keys()
        .chain(b.keys())
        .next()
        .map(|e| e.len())
        .unwrap_or(0);
    let one = || {
        let mut p = MPoly::new();
        p.insert(alloc::vec![0; nvars], Rat::one());
        p
    };
    if a.is_empty() {
        return Some(mp_normalize(b));
    }
    if b.is_empty() {
        return Some(mp_normalize(a));
    }
    if mp_is_const(a) || mp_is_const(b) {
        return Some(one());
    }
    // Choose the common variable with the smallest worst-case degree.
    let mut var: Option<(usize, u32)> = None;
    for v in 0..nvars {
        let da = mp_deg(a, v);
        let db = mp_deg(b, v);
        if da >= 1 && db >= 1 {
            let w = da.max(db);
            if var.map(|(_, bw)| w < bw).unwrap_or(true) {
                var = Some((v, w));
            }
        }
    }
    let (v, _) = match var {
        Some(v) => v,
        None => return Some(one()),
    };
    let (cont_a, pp_a) = mp_content_pp(a, v, budget)?;
    let (cont_b, pp_b) = mp_content_pp(b, v, budget)?;
    let cont = mp_gcd(&cont_a, &cont_b, budget)?;
    let mut big = mp_from_uni(&pp_a, v);
    let mut small = mp_from_uni(&pp_b, v);
    if mp_deg(&big, v) < mp_deg(&small, v) {
        core::mem::swap(&mut big, &mut small);
    }
    loop {
        if small.is_empty() {
            let (_, pp) = mp_content_pp(&big, v, budget)?;
            let g = mp_normalize(&mp_from_uni(&pp, v));
            return mp_mul(&g, &cont, budget).map(|p| mp_normalize(&p));
        }
        if mp_deg(&small, v) == 0 {
            // Nontrivial remainder of degree 0: the primitive parts are
            // coprime in v.
            return Some(mp_normalize(&cont));
        }
        // Pseudo-remainder of big by small in v.
        let db = mp_deg(&small, v);
        let lb = mp_uni(&small, v).remove(&db).expect("leading coefficient");
        let mut r = big.clone();
        while !r.is_empty() && mp_deg(&r, v) >= db {
            let dr = mp_deg(&r, v);
            let lr = mp_uni(&r, v).remove(&dr).expect("leading coefficient");
            let mut shift = MPoly::new();
            let mut e = alloc::vec![0u32; nvars];
            e[v] = dr - db;
            shift.insert(e, Rat::one());
            let r1 = mp_mul(&r, &lb, budget)?;
            let sub = mp_mul(&mp_mul(&small, &shift, budget)?, &lr, budget)?;
            r = mp_sub(&r1, &sub);
        }
        big = small;
        small = if r.is_empty() {
            r
        } else {
            let (_, pp) = mp_content_pp(&r, v, budget)?;
            mp_from_uni(&pp, v)
        };
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Attempts to cancel a common polynomial factor of `num` and `den`.
/// Returns the (possibly unchanged) pair; the result is always exactly equal
/// to the input fraction.
pub(super) fn reduce_fraction(num: Poly, den: Poly) -> (Poly, Poly) {
    if num.terms.len() > MAX_TERMS || den.terms.len() > MAX_TERMS {
        return (num, den);
    }
    // Set the numerator's monomial content aside so that common factors are
    // visible to the integer-exponent mapping.
    let ncont = num.monomial_content();
    let core = num.div_monomial(&ncont);
    let mapping = match Mapping::build(&[&core, &den]) {
        Some(m) => m,
        None => return (num, den),
    };
    let a = mapping.to_mpoly(&core);
    let b = mapping.to_mpoly(&den);
    let mut budget = BUDGET;
    let g = match mp_gcd(&a, &b, &mut budget) {
        Some(g) => g,
        None => return (num, den),
    };
    if mp_is_const(&g) {
        return (num, den);
    }
    let (qn, qd) = match (
        mp_div_exact(&a, &g, &mut budget),
        mp_div_exact(&b, &g, &mut budget),
    ) {
        (Some(qn), Some(qd)) => (qn, qd),
        _ => return (num, den),
    };
    let new_num = mapping
        .to_poly(&qn)
        .mul(&Poly::monomial(ncont, Rat::one()));
    let new_den = mapping.to_poly(&qd);
    if new_den.is_zero() {
        return (num, den);
    }
    (new_num, new_den)
}

/// Exact polynomial division `a / b` when it exists.
#[cfg(test)]
pub(crate) fn try_div_poly(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    let mapping = Mapping::build(&[a, b])?;
    let ma = mapping.to_mpoly(a);
    let mb = mapping.to_mpoly(b);
    let mut budget = BUDGET;
    let q = mp_div_exact(&ma, &mb, &mut budget)?;
    Some(mapping.to_poly(&q))
}

#[cfg(test)]
mod tests {
    use super::super::{Expr, Var};
    use super::*;

    fn x() -> Expr {
        Expr::var(Var::X)
    }
    fn t() -> Expr {
        Expr::var(Var::T)
    }

    #[test]
    fn cancels_multivariate_factors() {
        // (x+t)(x-t) / (x+t)(x+1) -> (x-t)/(x+1)
        let a = (&x() + &t()).mul(&(&x() - &t()));
        let b = (&x() + &t()).mul(&(&x() + &Expr::one()));
        let e = a.div(&b).unwrap();
        let expect = (&x() - &t()).div(&(&x() + &Expr::one())).unwrap();
        assert_eq!(e, expect);
    }

    #[test]
    fn cancels_powers_of_common_factor() {
        // (x+1)^3 / (x+1)^2 == x + 1
        let b = &x() + &Expr::one();
        let e = b.powi(3).unwrap().div(&b.powi(2).unwrap()).unwrap();
        assert_eq!(e, b);
    }

    #[test]
    fn exact_division_of_polys() {
        let a = (&x() + &t()).mul(&(&x() - &t()));
        let b = &x() + &t();
        let q = try_div_poly(a.num(), b.num()).expect("divisible");
        assert_eq!(Expr::from_poly(q), &x() - &t());
        let c = &x() + &Expr::one();
        assert!(try_div_poly(a.num(), c.num()).is_none());
    }
}
