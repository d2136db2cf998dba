//! Collecting an expression as a polynomial in a selected set of atoms —
//! the splitting step that turns one symbolic identity into a system of
//! coefficient equations, one per monomial in the selected atoms.

use alloc::collections::BTreeMap;

use super::{Atom, Expo, Expr, Monomial, Poly, Rat};

/// Why an expression is not polynomial in the selected atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectError {
    /// A selected atom occurs in the denominator (possibly nested).
    InDenominator,
    /// A selected atom occurs inside another atom's base, argument or
    /// exponent, where no polynomial reading exists.
    Nested,
    /// A selected atom carries an exponent that is not a positive integer.
    Power,
}

impl core::fmt::Display for CollectError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CollectError::InDenominator => {
                write!(f, "selected atom occurs in a denominator")
            }
            CollectError::Nested => {
                write!(f, "selected atom occurs nested inside another atom")
            }
            CollectError::Power => {
                write!(f, "selected atom has a non positive-integer exponent")
            }
        }
    }
}

/// The result of collecting: one coefficient expression per monomial in the
/// selected atoms. The empty monomial keys the part free of selected atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collected {
    groups: BTreeMap<Monomial, Expr>,
}

impl Collected {
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Expr)> {
        self.groups.iter()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Coefficient of a monomial; zero when the monomial does not occur.
    pub fn coefficient(&self, key: &Monomial) -> Expr {
        self.groups.get(key).cloned().unwrap_or_else(Expr::zero)
    }

    /// The part free of the selected atoms.
    pub fn constant_part(&self) -> Expr {
        self.coefficient(&Monomial::one())
    }

    /// Rebuilds the original expression from the groups (used to verify
    /// that collection is lossless).
    pub fn reassemble(&self) -> Expr {
        let mut acc = Expr::zero();
        for (key, coeff) in &self.groups {
            let key_expr = Expr::from_poly(Poly::monomial(key.clone(), num_traits::One::one()));
            acc = acc.add(&key_expr.mul(coeff));
        }
        acc
    }
}

impl Expr {
    /// Collects the expression as a polynomial in the atoms the selector
    /// accepts. Every selected atom must occur at the top level of the
    /// numerator with a positive integer exponent; otherwise the matching
    /// `CollectError` reports why no such reading exists.
    pub fn collect(&self, select: &impl Fn(&Atom) -> bool) -> Result<Collected, CollectError> {
        let mut den_hit = false;
        super::zero::poly_visit(self.den(), &mut |a| {
            if select(a) {
                den_hit = true;
            }
        });
        if den_hit {
            return Err(CollectError::InDenominator);
        }

        let mut residual: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.num().terms {
            let mut key = Monomial::one();
            let mut rest = Monomial::one();
            for (a, e) in &m.powers {
                if select(a) {
                    match e {
                        Expo::Int(k) if *k >= 1 => {
                            key.powers.insert(a.clone(), e.clone());
                        }
                        _ => return Err(CollectError::Power),
                    }
                } else {
                    // Selected atoms hidden inside an unselected atom or a
                    // symbolic exponent make the term non-polynomial.
                    let mut nested = false;
                    Expr::from_atom(a.clone()).for_each_atom(&mut |b| {
                        if select(b) {
                            nested = true;
                        }
                    });
                    if let Expo::Sym(inner) = e {
                        inner.for_each_atom(&mut |b| {
                            if select(b) {
                                nested = true;
                            }
                        });
                    }
                    if nested {
                        return Err(CollectError::Nested);
                    }
                    rest.powers.insert(a.clone(), e.clone());
                }
            }
            residual
                .entry(key)
                .or_insert_with(Poly::zero)
                .terms
                .entry(rest)
                .and_modify(|acc: &mut Rat| *acc += c.clone())
                .or_insert_with(|| c.clone());
        }

        let mut groups = BTreeMap::new();
        for (key, mut poly) in residual {
            poly.terms.retain(|_, c| !num_traits::Zero::is_zero(c));
            let coeff = Expr::make(poly, self.den().clone())
                .expect("term subset of a canonical fraction stays representable");
            if !coeff.is_zero() {
                groups.insert(key, coeff);
            }
        }
        Ok(Collected { groups })
    }

    /// Collects in the jet variables — the splitting used on symmetry
    /// residuals, whose coefficients depend only on base variables.
    pub fn collect_jets(&self) -> Result<Collected, CollectError> {
        self.collect(&|a: &Atom| matches!(a, Atom::Jet(_)))
    }
}
