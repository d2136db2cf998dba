//! Canonical symbolic expressions with exact rational arithmetic.
//!
//! An [`Expr`] is a fraction `num/den` of generalized polynomials. A
//! polynomial is a sum of monomials with `BigRational` coefficients; a
//! monomial is a product of [`Atom`]s raised to exponents that may be
//! integers, rationals, or parameter expressions (so `x^n` and
//! `(ln x + k)^(-a/b)` are first-class). Atoms cover the independent
//! variables `t, x, y, u`, jet variables `u_t, ..., u_xxy`, named
//! parameters, `ln`/`exp`/`sin`/`cos`, opaque power bases, prime constants
//! (for fractional powers of rationals), and opaque function symbols with
//! recorded partial derivatives.
//!
//! All constructors normalize: sums are merged, products expand, `exp`
//! splits over sums and folds `exp(a*ln b)` into powers, `ln` splits over
//! products, denominators are monic and content-free, and fractions are
//! reduced by a best-effort polynomial gcd. Two expressions built through
//! the public API therefore have equal structure exactly when the engine
//! can prove them equal; subtracting and testing [`Expr::is_zero`] is the
//! complete decision procedure for the rational fragment (see `zero.rs`).
//!
//! Everything is exact: no floating-point value ever enters a symbolic
//! path. Floats appear only in the explicit evaluation API (`eval.rs`).

mod calculus;
mod collect;
mod eval;
mod gcd;
mod grammar;
mod subst;
mod zero;

pub use calculus::DiffVar;
pub use collect::{CollectError, Collected};
pub use eval::{Env, EvalError};
pub use grammar::{parse, parse_poly, ParseError};
pub use zero::ZeroDecision;

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar used for every coefficient.
pub type Rat = BigRational;

/// Builds a `Rat` from an `i64`.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Builds a `Rat` from a numerator/denominator pair. `den` must be nonzero.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

fn rat_is_int(r: &Rat) -> bool {
    r.denom().is_one()
}

fn rat_floor_i64(r: &Rat) -> Option<i64> {
    use num_traits::ToPrimitive;
    r.floor().to_integer().to_i64()
}

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

/// Independent and dependent variables of the pricing equation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Var {
    T,
    X,
    Y,
    U,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::T, Var::X, Var::Y, Var::U];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::Y => "y",
            Var::U => "u",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        match s {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "u" => Some(Var::U),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A jet variable `u_J`: partial derivative counts of `u` with respect to
/// `t`, `x`, `y`. Order 1 and 2 jets are the working coordinates; order 3
/// appears transiently inside prolongations and must cancel there.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Jet {
    pub t: u8,
    pub x: u8,
    pub y: u8,
}

/// Maximum jet order the engine will materialize.
pub const MAX_JET_ORDER: u8 = 3;

impl Jet {
    pub fn new(t: u8, x: u8, y: u8) -> Jet {
        Jet { t, x, y }
    }

    /// Total derivative order.
    pub fn order(self) -> u8 {
        self.t + self.x + self.y
    }

    /// The jet obtained by one more derivative in `v`. `None` for `u`.
    pub fn bump(self, v: Var) -> Option<Jet> {
        match v {
            Var::T => Some(Jet { t: self.t + 1, ..self }),
            Var::X => Some(Jet { x: self.x + 1, ..self }),
            Var::Y => Some(Jet { y: self.y + 1, ..self }),
            Var::U => None,
        }
    }

    /// Renders the suffix, e.g. `txx` for `u_txx`.
    pub fn suffix(self) -> String {
        let mut s = String::new();
        for _ in 0..self.t {
            s.push('t');
        }
        for _ in 0..self.x {
            s.push('x');
        }
        for _ in 0..self.y {
            s.push('y');
        }
        s
    }

    /// Parses a suffix such as `xx` or `ty`. Rejects empty and over-order
    /// suffixes.
    pub fn from_suffix(s: &str) -> Option<Jet> {
        if s.is_empty() {
            return None;
        }
        let mut j = Jet::default();
        for c in s.chars() {
            match c {
                't' => j.t += 1,
                'x' => j.x += 1,
                'y' => j.y += 1,
                _ => return None,
            }
        }
        if j.order() > MAX_JET_ORDER {
            return None;
        }
        Some(j)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u_{}", self.suffix())
    }
}

/// An interned parameter name (`n`, `k1`, `eps3`, `C2`, ...). Parameters are
/// transcendentally independent scalar symbols; they never depend on the
/// variables.
#[derive(Clone, Debug)]
pub struct ParamSym(Arc<str>);

impl ParamSym {
    pub fn new(name: &str) -> ParamSym {
        ParamSym(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl PartialEq for ParamSym {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for ParamSym {}
impl PartialOrd for ParamSym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ParamSym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.as_ref().cmp(other.0.as_ref())
    }
}

/// An opaque function symbol, identified by name.
#[derive(Clone, Debug)]
pub struct FunSym(Arc<str>);

impl FunSym {
    pub fn new(name: &str) -> FunSym {
        FunSym(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl PartialEq for FunSym {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for FunSym {}
impl PartialOrd for FunSym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FunSym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.as_ref().cmp(other.0.as_ref())
    }
}

/// Application of an opaque function symbol to argument expressions,
/// together with a multiset of slot derivatives. `deriv[i]` counts partial
/// derivatives with respect to the i-th argument slot, so the chain rule
/// through composed arguments is exact.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FunApp {
    pub sym: FunSym,
    pub deriv: Vec<u8>,
    pub args: Vec<Expr>,
}

impl FunApp {
    /// Total derivative order of the tag.
    pub fn deriv_order(&self) -> u32 {
        self.deriv.iter().map(|&d| d as u32).sum()
    }
}

/// Trigonometric atom kind. These are opaque except for derivatives and
/// numeric evaluation; no algebraic identities are applied.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Trig {
    Sin,
    Cos,
}

// ---------------------------------------------------------------------------
// Atoms, monomials, polynomials
// ---------------------------------------------------------------------------

/// The multiplicative building blocks of monomials.
///
/// Canonical-form invariants, maintained by the smart constructors:
/// * `Log` bases are either a prime constant, a single unit atom, or a
///   multi-term polynomial with unit leading coefficient and no extractable
///   content; `ln` of anything else rewrites (products split, exponents pull
///   out, `ln exp` cancels).
/// * `Exp` arguments are primitive: rational content 1 and positive leading
///   coefficient; the content lives in the atom's exponent. `Exp` of a sum
///   splits into a product of atoms. `Exp(1)` is Euler's constant.
/// * `Pow` holds a multi-term base raised to a non-polynomial exponent; the
///   exponent (stored in the monomial) keeps its integer part at zero, the
///   base is content-free with unit leading coefficient.
/// * `Prime` carries fractional or symbolic powers of positive rationals;
///   integer powers fold back into coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Atom {
    Param(ParamSym),
    Prime(u64),
    Var(Var),
    Jet(Jet),
    Log(Box<Poly>),
    Exp(Box<Expr>),
    Pow(Box<Poly>),
    Trig(Trig, Box<Expr>),
    Fun(Box<FunApp>),
}

/// Exponent of an atom inside a monomial.
///
/// Normal form: integers use `Int`; non-integer rationals use `Rat`;
/// `Sym` holds a non-constant expression in parameters only.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expo {
    Int(i64),
    Rat(Rat),
    Sym(Box<Expr>),
}

impl Expo {
    pub const ONE: Expo = Expo::Int(1);

    pub fn from_rat(r: Rat) -> Expo {
        use num_traits::ToPrimitive;
        if rat_is_int(&r) {
            if let Some(i) = r.to_integer().to_i64() {
                return Expo::Int(i);
            }
        }
        Expo::Rat(r)
    }

    /// Normalizes an expression into an exponent. The expression must be
    /// free of variables and jets (parameters only).
    pub fn from_expr(e: &Expr) -> Option<Expo> {
        if !e.is_param_only() {
            return None;
        }
        Some(match e.as_rational() {
            Some(r) => Expo::from_rat(r),
            None => Expo::Sym(Box::new(e.clone())),
        })
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Expo::Int(i) => Expr::int(*i),
            Expo::Rat(r) => Expr::rational(r.clone()),
            Expo::Sym(e) => (**e).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expo::Int(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expo::Int(1))
    }

    /// Exact rational value, if the exponent is constant.
    pub fn as_rational(&self) -> Option<Rat> {
        match self {
            Expo::Int(i) => Some(rat_int(*i)),
            Expo::Rat(r) => Some(r.clone()),
            Expo::Sym(_) => None,
        }
    }

    pub fn add(&self, other: &Expo) -> Expo {
        match (self, other) {
            (Expo::Int(a), Expo::Int(b)) => Expo::Int(a + b),
            _ => Expo::from_expr(&(&self.to_expr() + &other.to_expr()))
                .expect("exponent arithmetic stays parameter-only"),
        }
    }

    pub fn sub(&self, other: &Expo) -> Expo {
        match (self, other) {
            (Expo::Int(a), Expo::Int(b)) => Expo::Int(a - b),
            _ => Expo::from_expr(&(&self.to_expr() - &other.to_expr()))
                .expect("exponent arithmetic stays parameter-only"),
        }
    }

    pub fn mul(&self, other: &Expo) -> Expo {
        match (self, other) {
            (Expo::Int(a), Expo::Int(b)) => Expo::Int(a * b),
            _ => Expo::from_expr(&(&self.to_expr() * &other.to_expr()))
                .expect("exponent arithmetic stays parameter-only"),
        }
    }

    pub fn neg(&self) -> Expo {
        match self {
            Expo::Int(a) => Expo::Int(-a),
            Expo::Rat(r) => Expo::from_rat(-r.clone()),
            Expo::Sym(e) => Expo::from_expr(&(-&**e)).expect("negation of parameter expression"),
        }
    }

    /// The canonical rational offset of the exponent: for constants, the
    /// value itself; for symbolic exponents, the coefficient in the
    /// numerator of the denominator's leading monomial (which shifts by `m`
    /// when the exponent shifts by an integer `m`). Used to pin the integer
    /// part of `Pow`/`Prime` exponents to `[0, 1)`.
    fn rational_offset(&self) -> Rat {
        match self {
            Expo::Int(i) => rat_int(*i),
            Expo::Rat(r) => r.clone(),
            Expo::Sym(e) => {
                let lead = e
                    .den
                    .terms
                    .iter()
                    .next_back()
                    .expect("nonzero denominator")
                    .0
                    .clone();
                e.num.terms.get(&lead).cloned().unwrap_or_else(Rat::zero)
            }
        }
    }

    /// Splits into `(k, e')` with `k` integer, `e' = self - k`, and the
    /// rational offset of `e'` in `[0, 1)`.
    fn split_int(&self) -> (i64, Expo) {
        let off = self.rational_offset();
        let k = rat_floor_i64(&off).expect("exponent offsets stay in i64 range");
        if k == 0 {
            (0, self.clone())
        } else {
            (k, self.sub(&Expo::Int(k)))
        }
    }
}

/// Product of atoms raised to exponents. Zero exponents never appear.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Monomial {
    pub powers: BTreeMap<Atom, Expo>,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn atom(a: Atom) -> Monomial {
        Monomial::atom_pow(a, Expo::ONE)
    }

    pub fn atom_pow(a: Atom, e: Expo) -> Monomial {
        let mut powers = BTreeMap::new();
        if !e.is_zero() {
            powers.insert(a, e);
        }
        Monomial { powers }
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree_of(&self, a: &Atom) -> Expo {
        self.powers.get(a).cloned().unwrap_or(Expo::Int(0))
    }
}

/// Sum of monomials with rational coefficients. Zero coefficients never
/// appear; the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn monomial(m: Monomial, c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn atom(a: Atom) -> Poly {
        Poly::monomial(Monomial::atom(a), Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Monomial::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    /// Constant value if the polynomial is a rational constant.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.clone() * c.clone()))
                .collect(),
        }
    }

    /// Product of two monomials with coefficient, as a polynomial: merging
    /// exponents can push a `Pow`/`Prime` exponent out of its canonical
    /// range, whose extracted integer part expands back into the base.
    fn mul_monomials(ma: &Monomial, ca: &Rat, mb: &Monomial, cb: &Rat) -> Poly {
        let mut coeff = ca.clone() * cb.clone();
        let mut merged: BTreeMap<Atom, Expo> = ma.powers.clone();
        for (a, e) in &mb.powers {
            let cur = merged.remove(a).unwrap_or(Expo::Int(0));
            let sum = cur.add(e);
            if !sum.is_zero() {
                merged.insert(a.clone(), sum);
            }
        }
        // Fold integer parts of Prime exponents into the coefficient. Pow
        // exponents merge freely here; their offsets are renormalized by the
        // sweep in `Expr::make`, which can emit denominators when needed.
        let mut powers = BTreeMap::new();
        for (a, e) in merged {
            match &a {
                Atom::Prime(p) => {
                    let (k, e1) = e.split_int();
                    if k != 0 {
                        coeff *= pow_rat(&rat_int(*p as i64), k);
                    }
                    if !e1.is_zero() {
                        powers.insert(a, e1);
                    }
                }
                _ => {
                    powers.insert(a, e);
                }
            }
        }
        Poly::monomial(Monomial { powers }, coeff)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let p = Poly::mul_monomials(ma, ca, mb, cb);
                out = out.add(&p);
            }
        }
        out
    }

    pub fn pow_usize(&self, k: usize) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Leading (largest) monomial in the canonical term order.
    fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Signed rational content: gcd of all coefficients, carrying the sign
    /// of the leading coefficient. Zero polynomial has content 0.
    fn rational_content(&self) -> Rat {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_integer::Integer::gcd(&num_gcd, c.numer());
            den_lcm = num_integer::Integer::lcm(&den_lcm, c.denom());
        }
        if num_gcd.is_zero() {
            return Rat::zero();
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        if let Some((_, lc)) = self.leading() {
            if lc.is_negative() {
                content = -content;
            }
        }
        content
    }

    /// Per-atom extractable content: for each atom occurring in *every*
    /// term with exponents in a single rational-offset class, the minimal
    /// exponent. The result divides the polynomial monomial-wise.
    fn monomial_content(&self) -> Monomial {
        let mut content = Monomial::one();
        if self.terms.is_empty() {
            return content;
        }
        let first = self.terms.keys().next().expect("nonempty");
        'atoms: for (a, e0) in &first.powers {
            let mut min = e0.clone();
            let mut min_off = e0.rational_offset();
            for m in self.terms.keys().skip(1) {
                match m.powers.get(a) {
                    None => continue 'atoms,
                    Some(e) => {
                        // Same class iff the difference of offsets equals the
                        // difference of exponents (a rational constant).
                        let diff = e.sub(&min);
                        match diff.as_rational() {
                            None => continue 'atoms,
                            Some(_) => {
                                let off = e.rational_offset();
                                if off < min_off {
                                    min = e.clone();
                                    min_off = off;
                                }
                            }
                        }
                    }
                }
            }
            content.powers.insert(a.clone(), min);
        }
        content
    }

    /// Divides by a content monomial (exponent subtraction on every term).
    fn div_monomial(&self, m: &Monomial) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        let inv = Monomial {
            powers: m.powers.iter().map(|(a, e)| (a.clone(), e.neg())).collect(),
        };
        let mut out = Poly::zero();
        for (mm, c) in &self.terms {
            out = out.add(&Poly::mul_monomials(mm, c, &inv, &Rat::one()));
        }
        out
    }

    /// Atoms occurring anywhere in the polynomial's own monomials (not
    /// recursing into nested bases or arguments).
    pub fn surface_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.terms.keys().flat_map(|m| m.powers.keys())
    }
}

fn pow_rat(base: &Rat, k: i64) -> Rat {
    let mut out = Rat::one();
    let b = if k >= 0 { base.clone() } else { Rat::one() / base.clone() };
    for _ in 0..k.unsigned_abs() {
        out *= b.clone();
    }
    out
}

// ---------------------------------------------------------------------------
// Expressions (canonical fractions)
// ---------------------------------------------------------------------------

/// Error raised by partial operations on expressions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExprError {
    /// Division by an expression that normalizes to zero.
    DivisionByZero,
    /// `ln` of zero, or of a negative rational constant. Symbolic bases are
    /// assumed positive (the working domain is `x > 0`); explicit negative
    /// constants are rejected rather than given a branch.
    LogDomain,
    /// A fractional power of a negative rational constant.
    FractionalPowerOfNegative,
    /// A symbolic exponent was expected to be a parameter-only expression.
    ExponentNotParameter,
    /// A jet variable beyond the supported order would be created; the
    /// offending jet is reported.
    JetOrder(Jet),
    /// Differentiation with respect to something that is not an independent
    /// variable or jet.
    BadDiffVar,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::DivisionByZero => write!(f, "division by zero"),
            ExprError::LogDomain => write!(f, "logarithm of a nonpositive constant"),
            ExprError::FractionalPowerOfNegative => {
                write!(f, "fractional power of a negative constant")
            }
            ExprError::ExponentNotParameter => {
                write!(f, "exponent must be a constant or parameter expression")
            }
            ExprError::JetOrder(j) => {
                write!(f, "jet variable {j} exceeds the supported derivative order")
            }
            ExprError::BadDiffVar => write!(f, "cannot differentiate with respect to this symbol"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ExprError {}

/// A canonical fraction of generalized polynomials.
///
/// Invariants: `den` is nonzero, plain (nonnegative integer exponents),
/// content-free, with unit leading coefficient; `num`/`den` share no factor
/// the gcd routine can find; `num` is zero exactly for the zero expression
/// (then `den` is 1).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    // -- constructors -------------------------------------------------------

    pub fn zero() -> Expr {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(rat_int(n))
    }

    pub fn rational(r: Rat) -> Expr {
        Expr { num: Poly::constant(r), den: Poly::one() }
    }

    /// Rational constant `num/den`.
    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::rational(rat(num, den))
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_atom(Atom::Var(v))
    }

    pub fn jet(j: Jet) -> Expr {
        Expr::from_atom(Atom::Jet(j))
    }

    pub fn param(name: &str) -> Expr {
        Expr::from_atom(Atom::Param(ParamSym::new(name)))
    }

    /// Application of an opaque function symbol to arguments.
    pub fn fun(name: &str, args: &[Expr]) -> Expr {
        Expr::fun_deriv(name, &alloc::vec![0; args.len()], args)
    }

    /// Function application carrying an explicit derivative tag.
    pub fn fun_deriv(name: &str, deriv: &[u8], args: &[Expr]) -> Expr {
        assert_eq!(deriv.len(), args.len(), "derivative tag must match arity");
        Expr::from_atom(Atom::Fun(Box::new(FunApp {
            sym: FunSym::new(name),
            deriv: deriv.to_owned(),
            args: args.to_owned(),
        })))
    }

    pub(crate) fn from_atom(a: Atom) -> Expr {
        Expr { num: Poly::atom(a), den: Poly::one() }
    }

    pub(crate) fn from_poly(p: Poly) -> Expr {
        Expr::make(p, Poly::one()).expect("unit denominator")
    }

    pub(crate) fn make(num: Poly, den: Poly) -> Result<Expr, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        let (mut num, mut den) = (num, den);
        normalize_fraction(&mut num, &mut den);
        if !den.is_one() {
            if num == den {
                return Ok(Expr::one());
            }
            let (rnum, rden) = gcd::reduce_fraction(num, den);
            num = rnum;
            den = rden;
            normalize_fraction(&mut num, &mut den);
        }
        Ok(Expr { num, den })
    }

    // -- inspectors ---------------------------------------------------------

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub(crate) fn num(&self) -> &Poly {
        &self.num
    }

    pub(crate) fn den(&self) -> &Poly {
        &self.den
    }

    /// Exact rational value, if constant.
    pub fn as_rational(&self) -> Option<Rat> {
        if !self.den.is_one() {
            return None;
        }
        self.num.as_rational()
    }

    /// Exact i64 value, if an integer constant.
    pub fn as_i64(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        let r = self.as_rational()?;
        if rat_is_int(&r) {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Visits every atom, including those nested in bases, arguments and
    /// symbolic exponents. Stops early when the visitor returns `true`.
    pub fn visit_atoms(&self, f: &mut impl FnMut(&Atom) -> bool) -> bool {
        fn poly_visit(p: &Poly, f: &mut impl FnMut(&Atom) -> bool) -> bool {
            for m in p.terms.keys() {
                for (a, e) in &m.powers {
                    if f(a) {
                        return true;
                    }
                    let nested = match a {
                        Atom::Log(b) | Atom::Pow(b) => poly_visit(b, f),
                        Atom::Exp(arg) | Atom::Trig(_, arg) => arg.visit_atoms(f),
                        Atom::Fun(app) => app.args.iter().any(|x| x.visit_atoms(f)),
                        _ => false,
                    };
                    if nested {
                        return true;
                    }
                    if let Expo::Sym(se) = e {
                        if se.visit_atoms(f) {
                            return true;
                        }
                    }
                }
            }
            false
        }
        poly_visit(&self.num, f) || poly_visit(&self.den, f)
    }

    /// True when the expression involves no variables, jets or function
    /// symbols (constants and parameters only).
    pub fn is_param_only(&self) -> bool {
        !self.visit_atoms(&mut |a| {
            matches!(a, Atom::Var(_) | Atom::Jet(_) | Atom::Fun(_))
        })
    }

    /// True when the expression depends on the given variable (anywhere,
    /// including inside function arguments and exponents).
    pub fn depends_on(&self, v: Var) -> bool {
        self.visit_atoms(&mut |a| matches!(a, Atom::Var(w) if *w == v))
    }

    /// True when any jet variable occurs.
    pub fn has_jets(&self) -> bool {
        self.visit_atoms(&mut |a| matches!(a, Atom::Jet(_)))
    }

    /// Largest jet order occurring anywhere in the expression.
    pub fn max_jet_order(&self) -> u8 {
        let mut max = 0;
        self.visit_atoms(&mut |a| {
            if let Atom::Jet(j) = a {
                if j.order() > max {
                    max = j.order();
                }
            }
            false
        });
        max
    }

    // -- arithmetic ---------------------------------------------------------

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Expr::make(self.num.add(&other.num), self.den.clone())
                .expect("denominator unchanged");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Expr::make(num, den).expect("product of nonzero denominators")
    }

    pub fn neg(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        Expr::make(num, den).expect("product of nonzero denominators")
    }

    pub fn scale(&self, c: &Rat) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        Expr::make(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Integer power.
    pub fn powi(&self, k: i64) -> Result<Expr, ExprError> {
        if k == 0 {
            return Ok(Expr::one());
        }
        if self.is_zero() {
            return if k > 0 { Ok(Expr::zero()) } else { Err(ExprError::DivisionByZero) };
        }
        let base = if k > 0 { self.clone() } else { self.recip()? };
        let mut out = Expr::one();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// General power with a constant or parameter-expression exponent.
    pub fn pow(&self, e: &Expr) -> Result<Expr, ExprError> {
        let expo = Expo::from_expr(e).ok_or(ExprError::ExponentNotParameter)?;
        self.pow_expo(&expo)
    }

    pub fn pow_expo(&self, e: &Expo) -> Result<Expr, ExprError> {
        if e.is_zero() {
            return Ok(Expr::one());
        }
        if e.is_one() {
            return Ok(self.clone());
        }
        if let Expo::Int(k) = e {
            return self.powi(*k);
        }
        if self.is_zero() {
            // Fractional/symbolic powers of zero: treat as zero (exponents
            // are assumed positive where this arises).
            return Ok(Expr::zero());
        }
        let np = poly_pow_general(&self.num, e)?;
        if self.den.is_one() {
            return Ok(np);
        }
        let dp = poly_pow_general(&self.den, &e.neg())?;
        Ok(np.mul(&dp))
    }

    /// Square root, i.e. power `1/2`.
    pub fn sqrt(&self) -> Result<Expr, ExprError> {
        self.pow_expo(&Expo::Rat(rat(1, 2)))
    }

    /// Natural logarithm. Splits over products and powers; `ln exp(a) = a`;
    /// `ln` of a rational constant becomes an exact combination of prime
    /// logarithms.
    pub fn ln(&self) -> Result<Expr, ExprError> {
        let n = ln_poly(&self.num)?;
        if self.den.is_one() {
            return Ok(n);
        }
        Ok(n.sub(&ln_poly(&self.den)?))
    }

    /// Exponential. Splits over sums: each additive term contributes one
    /// `Exp` atom (or a power, when the term is a multiple of a logarithm).
    pub fn exp(&self) -> Expr {
        if self.is_zero() {
            return Expr::one();
        }
        let mut out = Expr::one();
        for (m, c) in &self.num.terms {
            out = out.mul(&exp_term(m, c, &self.den));
        }
        out
    }

    pub fn sin(&self) -> Expr {
        trig_build(Trig::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        trig_build(Trig::Cos, self)
    }
}

/// Renormalizes out-of-range `Pow`/`Prime` exponents in a polynomial: every
/// rational offset is pinned into `[0, 1)`. Positive integer parts expand
/// the base into the term; negative parts are cleared by multiplying the
/// whole polynomial with base powers, which are returned as an extra
/// denominator. Returns the transformed polynomial and that denominator.
fn sweep_offsets(p: &Poly) -> (Poly, Poly) {
    // Collect, per Pow base, the largest clearing power any term needs.
    let mut clearing: BTreeMap<Poly, i64> = BTreeMap::new();
    let mut any_positive = false;
    for m in p.terms.keys() {
        for (a, e) in &m.powers {
            match a {
                Atom::Pow(base) => {
                    let (k, _) = e.split_int();
                    if k < 0 {
                        let need = -k;
                        let cur = clearing.entry((**base).clone()).or_insert(0);
                        if need > *cur {
                            *cur = need;
                        }
                    } else if k > 0 {
                        any_positive = true;
                    }
                }
                Atom::Prime(_) => {
                    let (k, _) = e.split_int();
                    if k != 0 {
                        any_positive = true;
                    }
                }
                _ => {}
            }
        }
    }
    if clearing.is_empty() && !any_positive {
        return (p.clone(), Poly::one());
    }
    let mut den = Poly::one();
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let mut coeff = c.clone();
        let mut powers = BTreeMap::new();
        let mut expand = Poly::one();
        // Credit per base from the global clearing factor.
        let mut credit: BTreeMap<&Poly, i64> = clearing.iter().map(|(b, k)| (b, *k)).collect();
        for (a, e) in &m.powers {
            match a {
                Atom::Pow(base) => {
                    let (k, e1) = e.split_int();
                    let credit_k = credit.remove(&**base).unwrap_or(0);
                    // Total plain base power carried by this term.
                    let total = k + credit_k;
                    debug_assert!(total >= 0);
                    if total > 0 {
                        expand = expand.mul(&base.pow_usize(total as usize));
                    }
                    if !e1.is_zero() {
                        powers.insert(a.clone(), e1);
                    }
                }
                Atom::Prime(q) => {
                    let (k, e1) = e.split_int();
                    if k != 0 {
                        coeff *= pow_rat(&rat_int(*q as i64), k);
                    }
                    if !e1.is_zero() {
                        powers.insert(a.clone(), e1);
                    }
                }
                _ => {
                    powers.insert(a.clone(), e.clone());
                }
            }
        }
        // Bases this term does not mention still multiply it.
        for (base, k) in credit {
            if k > 0 {
                expand = expand.mul(&base.pow_usize(k as usize));
            }
        }
        let head = Poly::monomial(Monomial { powers }, coeff);
        out = out.add(&head.mul(&expand));
    }
    for (base, k) in &clearing {
        den = den.mul(&base.pow_usize(*k as usize));
    }
    (out, den)
}

/// Brings a fraction to canonical form: `Pow`/`Prime` offsets in range on
/// both sides, extractable denominator content moved up, per-atom negative
/// rational denominator exponents cleared, denominator monic.
fn normalize_fraction(num: &mut Poly, den: &mut Poly) {
    debug_assert!(!den.is_zero() && !num.is_zero());
    for _round in 0..8 {
        let mut changed = false;
        // Offset sweep on both sides.
        let (n1, nd) = sweep_offsets(num);
        if !nd.is_one() {
            *num = n1;
            *den = den.mul(&nd);
            changed = true;
        } else if n1 != *num {
            *num = n1;
            changed = true;
        }
        let (d1, dd) = sweep_offsets(den);
        if !dd.is_one() {
            *den = d1;
            *num = num.mul(&dd);
            changed = true;
        } else if d1 != *den {
            *den = d1;
            changed = true;
        }
        // Content common to all denominator terms moves across the bar.
        let mcont = den.monomial_content();
        if !mcont.is_one() {
            let inv = Monomial {
                powers: mcont.powers.iter().map(|(a, e)| (a.clone(), e.neg())).collect(),
            };
            let mut moved = Poly::zero();
            for (m, c) in &num.terms {
                moved = moved.add(&Poly::mul_monomials(m, c, &inv, &Rat::one()));
            }
            *num = moved;
            *den = den.div_monomial(&mcont);
            changed = true;
        }
        // Negative rational exponents on atoms missing from some denominator
        // terms are cleared by multiplying both sides.
        let mut lift = Monomial::one();
        for m in den.terms.keys() {
            for (a, e) in &m.powers {
                if let Some(r) = e.as_rational() {
                    if r.is_negative() {
                        let cur = lift.powers.get(a).and_then(Expo::as_rational);
                        if cur.map(|c| -c > r).unwrap_or(true) {
                            lift.powers.insert(a.clone(), Expo::from_rat(-r));
                        }
                    }
                }
            }
        }
        if !lift.is_one() {
            let lp = Poly::monomial(lift, Rat::one());
            *num = num.mul(&lp);
            *den = den.mul(&lp);
            changed = true;
        }
        // Monic denominator.
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = Rat::one() / lc;
            *den = den.scale(&inv);
            *num = num.scale(&inv);
        }
        if num.is_zero() {
            *den = Poly::one();
            return;
        }
        if !changed {
            return;
        }
    }
    debug_assert!(false, "fraction normalization did not converge");
}

/// `P^e` for a nonzero polynomial and a non-integer exponent.
fn poly_pow_general(p: &Poly, e: &Expo) -> Result<Expr, ExprError> {
    debug_assert!(!p.is_zero());
    if p.is_one() {
        return Ok(Expr::one());
    }
    if p.terms.len() == 1 {
        let (m, c) = p.terms.iter().next().expect("single term");
        let mut out = rational_pow(c, e)?;
        for (a, ae) in &m.powers {
            out = out.mul(&atom_pow(a, &ae.mul(e)));
        }
        return Ok(out);
    }
    // Multi-term base: strip content, normalize leading coefficient by
    // absolute value (sign stays in the base), wrap in an opaque Pow atom.
    let ccont = {
        let mut c = p.rational_content();
        if c.is_negative() {
            c = -c;
        }
        c
    };
    let mcont = p.monomial_content();
    let mut base = p.div_monomial(&mcont).scale(&(Rat::one() / ccont.clone()));
    let lc = base.leading().expect("nonzero").1.clone();
    let alc = lc.abs();
    if !alc.is_one() {
        base = base.scale(&(Rat::one() / alc.clone()));
    }
    let scale = ccont * alc;
    let mut out = rational_pow(&scale, e)?;
    for (a, ae) in &mcont.powers {
        out = out.mul(&atom_pow(a, &ae.mul(e)));
    }
    out = out.mul(&atom_pow(&Atom::Pow(Box::new(base)), e));
    Ok(out)
}

/// `atom^e` as an expression; out-of-range `Pow`/`Prime` offsets are
/// renormalized by the construction sweep.
pub(super) fn atom_pow(a: &Atom, e: &Expo) -> Expr {
    if e.is_zero() {
        return Expr::one();
    }
    Expr::from_poly(Poly::monomial(
        Monomial::atom_pow(a.clone(), e.clone()),
        Rat::one(),
    ))
}

/// Exact `c^e` for rational `c`: prime factorization with fractional or
/// symbolic residues kept as `Prime` atoms.
fn rational_pow(c: &Rat, e: &Expo) -> Result<Expr, ExprError> {
    if c.is_one() {
        return Ok(Expr::one());
    }
    if c.is_zero() {
        return Ok(Expr::zero());
    }
    if let Expo::Int(k) = e {
        return Ok(Expr::rational(pow_rat(c, *k)));
    }
    if c.is_negative() {
        return Err(ExprError::FractionalPowerOfNegative);
    }
    let mut out = Expr::one();
    for (p, v) in factor_positive(c) {
        let pe = e.mul(&Expo::Int(v));
        out = out.mul(&atom_pow(&Atom::Prime(p), &pe));
    }
    Ok(out)
}

/// Prime factorization of a positive rational as `(prime, signed exponent)`.
fn factor_positive(c: &Rat) -> Vec<(u64, i64)> {
    use num_traits::ToPrimitive;
    let mut out: Vec<(u64, i64)> = Vec::new();
    let mut push = |n: &BigInt, sign: i64| {
        let mut n = n.to_u64().expect("prime factorization of huge constants is unsupported");
        let mut d = 2u64;
        while d * d <= n {
            while n % d == 0 {
                match out.iter_mut().find(|(p, _)| *p == d) {
                    Some((_, v)) => *v += sign,
                    None => out.push((d, sign)),
                }
                n /= d;
            }
            d += 1;
        }
        if n > 1 {
            match out.iter_mut().find(|(p, _)| *p == n) {
                Some((_, v)) => *v += sign,
                None => out.push((n, sign)),
            }
        }
    };
    push(c.numer(), 1);
    push(c.denom(), -1);
    out.retain(|(_, v)| *v != 0);
    out
}

/// `ln` of a nonzero polynomial.
fn ln_poly(p: &Poly) -> Result<Expr, ExprError> {
    if p.is_zero() {
        return Err(ExprError::LogDomain);
    }
    if p.is_one() {
        return Ok(Expr::zero());
    }
    if let Some(c) = p.as_rational() {
        return ln_rational(&c);
    }
    if p.terms.len() == 1 {
        let (m, c) = p.terms.iter().next().expect("single term");
        let mut out = ln_rational(c)?;
        for (a, e) in &m.powers {
            out = out.add(&ln_atom(a)?.mul(&e.to_expr()));
        }
        return Ok(out);
    }
    // Multi-term: extract content and |leading coefficient|, keep the sign
    // inside the base so only positive constants are split off.
    let mut ccont = p.rational_content();
    if ccont.is_negative() {
        ccont = -ccont;
    }
    let mcont = p.monomial_content();
    let mut base = p.div_monomial(&mcont).scale(&(Rat::one() / ccont.clone()));
    let lc = base.leading().expect("nonzero").1.clone();
    let alc = lc.abs();
    if !alc.is_one() {
        base = base.scale(&(Rat::one() / alc.clone()));
    }
    let mut out = ln_rational(&(ccont * alc))?;
    for (a, e) in &mcont.powers {
        out = out.add(&ln_atom(a)?.mul(&e.to_expr()));
    }
    Ok(out.add(&Expr::from_atom(Atom::Log(Box::new(base)))))
}

/// `ln` of a single atom.
fn ln_atom(a: &Atom) -> Result<Expr, ExprError> {
    match a {
        Atom::Exp(arg) => Ok((**arg).clone()),
        Atom::Prime(p) => Ok(Expr::from_atom(Atom::Log(Box::new(Poly::constant(rat_int(
            *p as i64,
        )))))),
        Atom::Pow(base) => ln_poly(base),
        _ => Ok(Expr::from_atom(Atom::Log(Box::new(Poly::atom(a.clone()))))),
    }
}

/// Exact `ln` of a positive rational via prime factorization; errors on
/// nonpositive input.
fn ln_rational(c: &Rat) -> Result<Expr, ExprError> {
    if c.is_one() {
        return Ok(Expr::zero());
    }
    if c.is_zero() || c.is_negative() {
        return Err(ExprError::LogDomain);
    }
    let mut out = Expr::zero();
    for (p, v) in factor_positive(c) {
        let lp = Expr::from_atom(Atom::Log(Box::new(Poly::constant(rat_int(p as i64)))));
        out = out.add(&lp.scale(&rat_int(v)));
    }
    Ok(out)
}

/// One additive term of an `exp` argument, as a product of canonical atoms.
/// `exp(c*m/den)`: a pure multiple of a logarithm folds into a power; a
/// constant folds into a power of Euler's constant; otherwise an `Exp` atom
/// with primitive argument `m/den` and exponent `c`.
fn exp_term(m: &Monomial, c: &Rat, den: &Poly) -> Expr {
    // exp(c*ln(B)/den) = B^(c/den) when the term is exactly one logarithm.
    if m.powers.len() == 1 {
        let (a, e) = m.powers.iter().next().expect("single atom");
        if let (Atom::Log(base), Expo::Int(1)) = (a, e) {
            let expo = if den.is_one() {
                Expo::from_rat(c.clone())
            } else {
                let ed = Expr::make(Poly::constant(c.clone()), den.clone())
                    .expect("nonzero denominator");
                Expo::from_expr(&ed).expect("exp arguments are parameter-only in exponents")
            };
            if let Ok(p) = poly_pow_general(base, &expo) {
                return p;
            }
        }
    }
    let arg = Expr::make(Poly::monomial(m.clone(), Rat::one()), den.clone())
        .expect("nonzero denominator");
    Expr::from_poly(Poly::monomial(
        Monomial::atom_pow(Atom::Exp(Box::new(arg)), Expo::from_rat(c.clone())),
        Rat::one(),
    ))
}

/// Builds `sin`/`cos` atoms with sign normalization (`sin` is odd, `cos`
/// even) and exact values at zero.
fn trig_build(kind: Trig, arg: &Expr) -> Expr {
    if arg.is_zero() {
        return match kind {
            Trig::Sin => Expr::zero(),
            Trig::Cos => Expr::one(),
        };
    }
    let lead_negative = arg
        .num
        .leading()
        .map(|(_, c)| c.is_negative())
        .unwrap_or(false);
    let (arg, flip) = if lead_negative { (arg.neg(), true) } else { (arg.clone(), false) };
    let atom = Expr::from_atom(Atom::Trig(kind, Box::new(arg)));
    match (kind, flip) {
        (Trig::Sin, true) => atom.neg(),
        _ => atom,
    }
}

// ---------------------------------------------------------------------------
// Operator sugar
// ---------------------------------------------------------------------------

impl core::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}
impl core::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}
impl core::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}
impl core::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(Var::X)
    }
    fn t() -> Expr {
        Expr::var(Var::T)
    }

    #[test]
    fn rational_arithmetic_is_exact() {
        let a = Expr::ratio(1, 3);
        let b = Expr::ratio(1, 6);
        assert_eq!((&a + &b).as_rational(), Some(rat(1, 2)));
        assert_eq!((&a - &b).as_rational(), Some(rat(1, 6)));
        assert_eq!(a.mul(&b).as_rational(), Some(rat(1, 18)));
        assert_eq!(a.div(&b).unwrap().as_i64(), Some(2));
    }

    #[test]
    fn sums_merge_and_cancel() {
        let e = &(&x() + &t()) - &x();
        assert_eq!(e, t());
        let z = &x() - &x();
        assert!(z.is_zero());
    }

    #[test]
    fn products_expand() {
        // (x + 1)*(x - 1) == x^2 - 1
        let p = (&x() + &Expr::one()).mul(&(&x() - &Expr::one()));
        let q = x().powi(2).unwrap().sub(&Expr::one());
        assert_eq!(p, q);
    }

    #[test]
    fn denominators_are_canonical() {
        // 1/(2x + 2) has monic denominator x + 1 and scalar 1/2 in num.
        let d = (&x() + &Expr::one()).scale(&rat_int(2));
        let e = Expr::one().div(&d).unwrap();
        let back = e.mul(&d);
        assert!(back.is_one());
        // x^2/x normalizes to x as a pure monomial (Laurent content).
        let e = x().powi(2).unwrap().div(&x()).unwrap();
        assert_eq!(e, x());
    }

    #[test]
    fn fraction_reduction_cancels_common_factors() {
        // (x^2 - 1)/(x - 1) == x + 1
        let numr = x().powi(2).unwrap().sub(&Expr::one());
        let denr = &x() - &Expr::one();
        let e = numr.div(&denr).unwrap();
        assert_eq!(e, &x() + &Expr::one());
    }

    #[test]
    fn subtraction_after_division_detects_zero() {
        // Even if reduction were weak, (a/b - c) with a == b*c must vanish.
        let a = (&x() + &Expr::one()).mul(&(&t() + &x()));
        let b = &x() + &Expr::one();
        let q = a.div(&b).unwrap();
        assert!(q.sub(&(&t() + &x())).is_zero());
    }

    #[test]
    fn symbolic_exponents_combine() {
        let n = Expr::param("n");
        let xn = x().pow(&n).unwrap();
        // x^n * x^n = x^(2n), and (x^n)/x = x^(n-1)
        let sq = xn.mul(&xn);
        let expect = x().pow(&n.scale(&rat_int(2))).unwrap();
        assert_eq!(sq, expect);
        let down = xn.div(&x()).unwrap();
        let expect = x().pow(&(&n - &Expr::one())).unwrap();
        assert_eq!(down, expect);
    }

    #[test]
    fn exp_splits_and_folds_logs() {
        // exp(t + ln x) = x * exp(t)
        let e = (&t() + &x().ln().unwrap()).exp();
        let expect = x().mul(&t().exp());
        assert_eq!(e, expect);
        // exp(2 ln x) = x^2
        let e = x().ln().unwrap().scale(&rat_int(2)).exp();
        assert_eq!(e, x().powi(2).unwrap());
        // ln(exp(t)) = t
        assert_eq!(t().exp().ln().unwrap(), t());
    }

    #[test]
    fn exp_merges_under_multiplication() {
        // exp(t)*exp(-t) == 1, exp(t/2)^2 == exp(t)
        let et = t().exp();
        let emt = t().neg().exp();
        assert!(et.mul(&emt).is_one());
        let half = t().scale(&rat(1, 2)).exp();
        assert_eq!(half.mul(&half), et);
    }

    #[test]
    fn ln_of_rationals_uses_primes() {
        // ln(8/9) = 3 ln 2 - 2 ln 3
        let e = Expr::ratio(8, 9).ln().unwrap();
        let l2 = Expr::rational(rat_int(2)).ln().unwrap();
        let l3 = Expr::rational(rat_int(3)).ln().unwrap();
        let expect = l2.scale(&rat_int(3)).sub(&l3.scale(&rat_int(2)));
        assert_eq!(e, expect);
        // exp(ln(8/9)) round-trips to the constant.
        assert_eq!(e.exp().as_rational(), Some(rat(8, 9)));
    }

    #[test]
    fn ln_splits_products_and_powers() {
        // ln(2 x^3 (x+1)) = ln 2 + 3 ln x + ln(x+1)
        let arg = Expr::int(2)
            .mul(&x().powi(3).unwrap())
            .mul(&(&x() + &Expr::one()));
        let e = arg.ln().unwrap();
        let expect = Expr::int(2)
            .ln()
            .unwrap()
            .add(&x().ln().unwrap().scale(&rat_int(3)))
            .add(&(&x() + &Expr::one()).ln().unwrap());
        assert_eq!(e, expect);
    }

    #[test]
    fn opaque_power_bases_renormalize() {
        // B = x + 1, n symbolic: B^n * B = B^(n+1) and B^n / B = B^(n-1),
        // and (B^n)*(B^(1-n)) collapses to B.
        let b = &x() + &Expr::one();
        let n = Expr::param("n");
        let bn = b.pow(&n).unwrap();
        let b1n = b.pow(&(&Expr::one() - &n)).unwrap();
        let prod = bn.mul(&b1n);
        assert_eq!(prod, b);
        let up = bn.mul(&b);
        assert_eq!(up, b.pow(&(&n + &Expr::one())).unwrap());
        let down = bn.div(&b).unwrap();
        assert_eq!(down, b.pow(&(&n - &Expr::one())).unwrap());
    }

    #[test]
    fn fractional_powers_of_rationals() {
        // 8^(1/2) = 2 * 2^(1/2); squaring returns 8.
        let r = Expr::int(8).sqrt().unwrap();
        let sq = r.mul(&r);
        assert_eq!(sq.as_i64(), Some(8));
        // 4^(1/2) = 2 exactly.
        assert_eq!(Expr::int(4).sqrt().unwrap().as_i64(), Some(2));
    }

    #[test]
    fn negative_constant_guards() {
        assert!(matches!(Expr::int(-3).ln(), Err(ExprError::LogDomain)));
        assert!(matches!(Expr::int(0).ln(), Err(ExprError::LogDomain)));
        assert!(matches!(
            Expr::int(-2).sqrt(),
            Err(ExprError::FractionalPowerOfNegative)
        ));
        assert!(Expr::one().div(&Expr::zero()).is_err());
    }

    #[test]
    fn trig_normalizes_sign_and_zero() {
        assert!(Expr::zero().sin().is_zero());
        assert!(Expr::zero().cos().is_one());
        let s = x().neg().sin();
        assert_eq!(s, x().sin().neg());
        let c = x().neg().cos();
        assert_eq!(c, x().cos());
    }

    #[test]
    fn euler_constant_round_trip() {
        // e = exp(1); ln(e^3) = 3.
        let e3 = Expr::int(3).exp();
        assert_eq!(e3.ln().unwrap().as_i64(), Some(3));
    }

    #[test]
    fn jets_and_functions_are_independent_atoms() {
        let uxx = Expr::jet(Jet::new(0, 2, 0));
        let f = Expr::fun("f", &[Expr::var(Var::X)]);
        let sum = &uxx + &f;
        assert!(!sum.is_zero());
        assert!(sum.sub(&uxx).sub(&f).is_zero());
        assert!(sum.has_jets());
        assert_eq!(sum.max_jet_order(), 2);
    }
}
