//! Drift recognition and the classifying ordinary differential equation.
//!
//! Symmetry enlargement for `u_t = x²u_xx + f(x)u_y` happens exactly when
//! the drift solves `(a2·ln x + a3)·x·f′ + a1·f = a4` for constants not all
//! zero. Its solutions, up to the equivalence group, are the three families
//!
//! ```text
//! f = k1·x^n + k2            (n ≠ 0)
//! f = k1·(ln x + k2)^n + k3  (n ≠ 0)
//! f = k1·ln(ln x + k2) + k3
//! ```
//!
//! with `k1 ≠ 0` throughout. This module recognizes those shapes from a bare
//! expression (by derivative ratios, not syntax), solves the classifying
//! equation branch by branch, and produces the equivalence transform that
//! maps a recognized drift onto its normal form `x̄`, `ln^n x̄` or
//! `ln ln x̄`, verifying the drift law symbolically each time.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::expr::{rat, Expr, ExprError, Var};
use crate::transform::{EquivalenceTransform, TransformError};

/// Error raised by recognition, classification or canonicalization.
#[derive(Clone, PartialEq, Debug)]
pub enum FamilyError {
    /// The drift depended on a variable other than `x`.
    NotXOnly(Var),
    /// The drift contained jet variables.
    JetsPresent,
    /// The drift is constant: the equation reduces to the heat kernel family
    /// and has no classifying content.
    ConstantDrift,
    /// The drift does not belong to a recognized family.
    NotRecognized,
    /// The classifying equation degenerated (`a2 = a3 = 0`).
    DegenerateClassifier,
    /// An expression operation failed.
    Expr(ExprError),
    /// Building the canonicalizing transform failed.
    Transform(TransformError),
}

impl From<ExprError> for FamilyError {
    fn from(e: ExprError) -> Self {
        FamilyError::Expr(e)
    }
}

impl From<TransformError> for FamilyError {
    fn from(e: TransformError) -> Self {
        FamilyError::Transform(e)
    }
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::NotXOnly(v) => write!(f, "drift depends on {v}; only x is allowed"),
            FamilyError::JetsPresent => write!(f, "drift contains derivative coordinates"),
            FamilyError::ConstantDrift => {
                write!(f, "constant drift: reducible to the heat kernel family")
            }
            FamilyError::NotRecognized => write!(f, "drift is outside the recognized families"),
            FamilyError::DegenerateClassifier => {
                write!(f, "degenerate classifying equation: a2 = a3 = 0")
            }
            FamilyError::Expr(e) => write!(f, "{e}"),
            FamilyError::Transform(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FamilyError {}

/// A recognized drift family with extracted constants.
#[derive(Clone, PartialEq, Debug)]
pub enum FunctionFamily {
    /// `k1·x^n + k2`, `k1 ≠ 0`, `n ≠ 0`.
    Power { k1: Expr, n: Expr, k2: Expr },
    /// `k1·(ln x + k2)^n + k3`, `k1 ≠ 0`, `n ≠ 0`.
    LogPower { k1: Expr, k2: Expr, n: Expr, k3: Expr },
    /// `k1·ln(ln x + k2) + k3`, `k1 ≠ 0`.
    LogLog { k1: Expr, k2: Expr, k3: Expr },
    /// A constant drift.
    Constant(Expr),
    /// None of the above.
    Generic,
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionFamily::Power { k1, n, k2 } => {
                write!(f, "power family: k1 = {k1}, n = {n}, k2 = {k2}")
            }
            FunctionFamily::LogPower { k1, k2, n, k3 } => {
                write!(f, "log-power family: k1 = {k1}, k2 = {k2}, n = {n}, k3 = {k3}")
            }
            FunctionFamily::LogLog { k1, k2, k3 } => {
                write!(f, "log-log family: k1 = {k1}, k2 = {k2}, k3 = {k3}")
            }
            FunctionFamily::Constant(c) => write!(f, "constant drift {c}"),
            FunctionFamily::Generic => write!(f, "generic drift"),
        }
    }
}

impl FunctionFamily {
    /// Rebuilds the drift expression from the extracted constants.
    pub fn to_expr(&self) -> Result<Expr, ExprError> {
        let x = Expr::var(Var::X);
        match self {
            FunctionFamily::Power { k1, n, k2 } => Ok(k1.mul(&x.pow(n)?).add(k2)),
            FunctionFamily::LogPower { k1, k2, n, k3 } => {
                let base = x.ln()?.add(k2);
                Ok(k1.mul(&base.pow(n)?).add(k3))
            }
            FunctionFamily::LogLog { k1, k2, k3 } => {
                let inner = x.ln()?.add(k2);
                Ok(k1.mul(&inner.ln()?).add(k3))
            }
            FunctionFamily::Constant(c) => Ok(c.clone()),
            FunctionFamily::Generic => Err(ExprError::DivisionByZero),
        }
    }
}

fn rational_zero(e: &Expr) -> bool {
    e.as_rational().map(|r| r == rat(0, 1)).unwrap_or(false)
}

/// Recognizes the family of an `x`-only drift by derivative ratios. Symbolic
/// parameters are assumed nonzero where a branch requires it; explicitly
/// rational constants are checked.
pub fn recognize(f: &Expr) -> Result<FunctionFamily, FamilyError> {
    for v in [Var::T, Var::Y, Var::U] {
        if f.depends_on(v) {
            return Err(FamilyError::NotXOnly(v));
        }
    }
    if f.has_jets() {
        return Err(FamilyError::JetsPresent);
    }
    if !f.depends_on(Var::X) {
        return Ok(FunctionFamily::Constant(f.clone()));
    }
    if let Some(fam) = try_power(f) {
        return Ok(fam);
    }
    if let Some(fam) = try_log_power(f) {
        return Ok(fam);
    }
    if let Some(fam) = try_log_log(f) {
        return Ok(fam);
    }
    Ok(FunctionFamily::Generic)
}

/// `f = k1·x^n + k2` has constant `x·f″/f′ = n − 1`.
fn try_power(f: &Expr) -> Option<FunctionFamily> {
    let x = Expr::var(Var::X);
    let fp = f.diff(Var::X);
    let fpp = fp.diff(Var::X);
    let r = x.mul(&fpp).div(&fp).ok()?;
    if !r.is_param_only() {
        return None;
    }
    let n = r.add(&Expr::one());
    if rational_zero(&n) {
        return None;
    }
    let k1 = fp.mul(&x.pow(&Expr::one().sub(&n)).ok()?).div(&n).ok()?;
    if !k1.is_param_only() {
        return None;
    }
    let k2 = f.sub(&k1.mul(&x.pow(&n).ok()?));
    if !k2.is_param_only() {
        return None;
    }
    Some(FunctionFamily::Power { k1, n, k2 })
}

/// `f = k1·L^n + k3` with `L = ln x + k2`: writing `g = x·f′` and
/// `s = x·g′/g = (n−1)/L`, the combination `x·s′/s² = −1/(n−1)` is constant.
fn try_log_power(f: &Expr) -> Option<FunctionFamily> {
    let x = Expr::var(Var::X);
    let lnx = x.ln().ok()?;
    let g = x.mul(&f.diff(Var::X));
    if g.is_zero() {
        return None;
    }
    let s = x.mul(&g.diff(Var::X)).div(&g).ok()?;
    if s.is_zero() {
        // n = 1: f = k1·ln x + k3 (the shift k2 is absorbed into k3).
        let k1 = g;
        if !k1.is_param_only() {
            return None;
        }
        let k3 = f.sub(&k1.mul(&lnx));
        if !k3.is_param_only() {
            return None;
        }
        return Some(FunctionFamily::LogPower {
            k1,
            k2: Expr::zero(),
            n: Expr::one(),
            k3,
        });
    }
    let c = x.mul(&s.diff(Var::X)).div(&s.mul(&s)).ok()?;
    if !c.is_param_only() || rational_zero(&c) {
        return None;
    }
    let n = Expr::one().sub(&Expr::one().div(&c).ok()?);
    if rational_zero(&n) {
        return None;
    }
    let big_l = n.sub(&Expr::one()).div(&s).ok()?;
    let k2 = big_l.sub(&lnx);
    if !k2.is_param_only() {
        return None;
    }
    let k1 = g
        .div(&n.mul(&big_l.pow(&n.sub(&Expr::one())).ok()?))
        .ok()?;
    if !k1.is_param_only() {
        return None;
    }
    let k3 = f.sub(&k1.mul(&big_l.pow(&n).ok()?));
    if !k3.is_param_only() {
        return None;
    }
    Some(FunctionFamily::LogPower { k1, k2, n, k3 })
}

/// `f = k1·ln(ln x + k2) + k3`: with `w = 1/(x·f′) = L/k1` the combination
/// `x·w′ = 1/k1` is constant.
fn try_log_log(f: &Expr) -> Option<FunctionFamily> {
    let x = Expr::var(Var::X);
    let lnx = x.ln().ok()?;
    let fp = f.diff(Var::X);
    if fp.is_zero() {
        return None;
    }
    let w = Expr::one().div(&x.mul(&fp)).ok()?;
    let c = x.mul(&w.diff(Var::X));
    if !c.is_param_only() || rational_zero(&c) {
        return None;
    }
    let k1 = Expr::one().div(&c).ok()?;
    let big_l = k1.mul(&w);
    let k2 = big_l.sub(&lnx);
    if !k2.is_param_only() {
        return None;
    }
    let k3 = f.sub(&k1.mul(&big_l.ln().ok()?));
    if !k3.is_param_only() {
        return None;
    }
    Some(FunctionFamily::LogLog { k1, k2, k3 })
}

/// One solved branch of the classifying equation
/// `(a2·ln x + a3)·x·f′ + a1·f = a4`.
#[derive(Clone, PartialEq, Debug)]
pub struct BranchSolution {
    /// Branch number 1–4 in the order of the case split below.
    pub branch: u8,
    /// The general solution, with `C` the free integration constant.
    pub f: Expr,
    /// The family the solution belongs to.
    pub family: FunctionFamily,
    /// The classifying equation evaluated on `f` (identically zero).
    pub residual: Expr,
}

/// Solves the classifying equation by cases on which coefficients vanish.
/// Explicit rational zeros decide the branch; symbolic coefficients are
/// treated as nonzero. The free constant is the parameter `C`.
///
/// Branches: 1. `a1 ≠ 0, a2 = 0, a3 ≠ 0` gives `C·x^(−a1/a3) + a4/a1`;
/// 2. `a1 ≠ 0, a2 ≠ 0` gives `C·(a2·ln x + a3)^(−a1/a2) + a4/a1`;
/// 3. `a1 = a2 = 0, a3 ≠ 0, a4 ≠ 0` gives `(a4/a3)·ln x + C`;
/// 4. `a1 = 0, a2 ≠ 0, a4 ≠ 0` gives `(a4/a2)·ln(a2·ln x + a3) + C`.
pub fn solve_classifying_ode(a: &[Expr; 4]) -> Result<BranchSolution, FamilyError> {
    let [a1, a2, a3, a4] = a;
    let x = Expr::var(Var::X);
    let c = Expr::param("C");
    let a1_zero = rational_zero(a1) || a1.is_zero();
    let a2_zero = rational_zero(a2) || a2.is_zero();
    let a3_zero = rational_zero(a3) || a3.is_zero();
    let a4_zero = rational_zero(a4) || a4.is_zero();

    if a2_zero && a3_zero {
        return Err(FamilyError::DegenerateClassifier);
    }

    let (branch, f) = if !a1_zero {
        if a2_zero {
            let expo = Expr::zero().sub(&a1.div(a3)?);
            (1, c.mul(&x.pow(&expo)?).add(&a4.div(a1)?))
        } else {
            let base = a2.mul(&x.ln()?).add(a3);
            let expo = Expr::zero().sub(&a1.div(a2)?);
            (2, c.mul(&base.pow(&expo)?).add(&a4.div(a1)?))
        }
    } else if a4_zero {
        // a1 = a4 = 0 forces f′ = 0.
        return Err(FamilyError::ConstantDrift);
    } else if a2_zero {
        (3, a4.div(a3)?.mul(&x.ln()?).add(&c))
    } else {
        let base = a2.mul(&x.ln()?).add(a3);
        (4, a4.div(a2)?.mul(&base.ln()?).add(&c))
    };

    let residual = classifying_residual(a, &f);
    let family = recognize(&f)?;
    Ok(BranchSolution {
        branch,
        f,
        family,
        residual,
    })
}

/// `(a2·ln x + a3)·x·f′ + a1·f − a4` for a candidate drift.
pub fn classifying_residual(a: &[Expr; 4], f: &Expr) -> Expr {
    let x = Expr::var(Var::X);
    let lnx = x.ln().expect("ln x");
    let coeff = a[1].mul(&lnx).add(&a[2]);
    coeff.mul(&x).mul(&f.diff(Var::X)).add(&a[0].mul(f)).sub(&a[3])
}

/// The forced shape of the `x`-component of a symmetry field:
/// `ξ¹ = (½·ξ⁰′(t)·(ln x − 1) + P(t,y))·x`, for a time-only `ξ⁰` and an
/// arbitrary `P`.
pub fn x_direction_shape(xi0: &Expr, p: &Expr) -> Result<Expr, FamilyError> {
    if xi0.depends_on(Var::X) || xi0.depends_on(Var::Y) {
        return Err(FamilyError::NotXOnly(Var::X));
    }
    for e in [xi0, p] {
        if e.depends_on(Var::U) || e.has_jets() {
            return Err(FamilyError::JetsPresent);
        }
    }
    let x = Expr::var(Var::X);
    let half = Expr::ratio(1, 2);
    let shape = half
        .mul(&xi0.total_derivative(Var::T)?)
        .mul(&x.ln()?.sub(&Expr::one()))
        .add(p);
    Ok(shape.mul(&x))
}

/// The second-order determining equation that forces the shape above:
/// `x·ξ⁰_t − 2x·ξ¹_x + 2ξ¹` (the `ξ⁰_y` term is absent because the
/// time-translation component is taken independent of `y`).
pub fn x_shape_equation(xi0: &Expr, xi1: &Expr) -> Result<Expr, FamilyError> {
    let x = Expr::var(Var::X);
    Ok(x
        .mul(&xi0.total_derivative(Var::T)?)
        .sub(&Expr::int(2).mul(&x).mul(&xi1.total_derivative(Var::X)?))
        .add(&Expr::int(2).mul(xi1)))
}

/// The normal form a drift canonicalizes to.
#[derive(Clone, PartialEq, Debug)]
pub enum CanonicalShape {
    /// `f̄(x̄) = x̄`.
    Identity,
    /// `f̄(x̄) = ln^n x̄`.
    LogPower(Expr),
    /// `f̄(x̄) = ln ln x̄`.
    LogLog,
}

impl CanonicalShape {
    /// The normal form as an expression in the (barred) spatial variable,
    /// written with the unbarred symbol `x`.
    pub fn shape_expr(&self) -> Result<Expr, ExprError> {
        let x = Expr::var(Var::X);
        match self {
            CanonicalShape::Identity => Ok(x),
            CanonicalShape::LogPower(n) => x.ln()?.pow(n),
            CanonicalShape::LogLog => x.ln()?.ln(),
        }
    }
}

impl fmt::Display for CanonicalShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalShape::Identity => write!(f, "x"),
            CanonicalShape::LogPower(n) => write!(f, "ln(x)^({n})"),
            CanonicalShape::LogLog => write!(f, "ln(ln(x))"),
        }
    }
}

/// A drift together with the group element mapping it to its normal form.
#[derive(Clone, PartialEq, Debug)]
pub struct Canonicalization {
    pub transform: EquivalenceTransform,
    pub shape: CanonicalShape,
    /// The drift law `f̄ ∘ x̄ = (ε5·f − ε4)/ε1²` was checked symbolically.
    pub verified: bool,
    pub description: String,
}

/// Builds the canonicalizing transform for a recognized family and verifies
/// the drift law symbolically: the transformed drift, composed with the
/// barred spatial coordinate, reproduces the normal form exactly.
pub fn canonicalize(family: &FunctionFamily) -> Result<Canonicalization, FamilyError> {
    let one = Expr::one();
    let zero = Expr::zero();
    let (eps, shape) = match family {
        FunctionFamily::Power { k1, n, k2 } => {
            if rational_zero(k1) || rational_zero(n) {
                return Err(FamilyError::NotRecognized);
            }
            let n2 = n.mul(n);
            let eps = [
                n.clone(),
                zero.clone(),
                one.clone(),
                n2.mul(k2).div(k1)?,
                n2.div(k1)?,
                zero.clone(),
                one.clone(),
            ];
            (eps, CanonicalShape::Identity)
        }
        FunctionFamily::LogPower { k1, k2, n, k3 } => {
            if rational_zero(k1) || rational_zero(n) {
                return Err(FamilyError::NotRecognized);
            }
            let eps = [
                one.clone(),
                zero.clone(),
                k2.exp(),
                k3.div(k1)?,
                one.div(k1)?,
                zero.clone(),
                one.clone(),
            ];
            (eps, CanonicalShape::LogPower(n.clone()))
        }
        FunctionFamily::LogLog { k1, k2, k3 } => {
            if rational_zero(k1) {
                return Err(FamilyError::NotRecognized);
            }
            let eps = [
                one.clone(),
                zero.clone(),
                k2.exp(),
                k3.div(k1)?,
                one.div(k1)?,
                zero.clone(),
                one.clone(),
            ];
            (eps, CanonicalShape::LogLog)
        }
        FunctionFamily::Constant(_) => return Err(FamilyError::ConstantDrift),
        FunctionFamily::Generic => return Err(FamilyError::NotRecognized),
    };

    let transform = EquivalenceTransform::new(eps, Expr::zero())?;
    let f = family.to_expr()?;
    let mapped = transform.apply_drift(&f)?;
    let [_, xbar, _, _] = transform.barred_coords()?;
    let target = shape.shape_expr()?.subst_var(Var::X, &xbar)?;
    let verified = mapped.sub(&target).is_zero();
    let description = format!("{} -> {} via {}", family, shape, transform.describe());
    Ok(Canonicalization {
        transform,
        shape,
        verified,
        description,
    })
}

/// Exhaustive bounded search for a drift-law match between two drifts: grid
/// over the scaling parameters `ε1, ε3`, exact 2-point solve for the affine
/// pair `ε5, ε4`, then a full symbolic identity check
/// `ε5·f(x) − ε4 = ε1²·g(ε3·x^ε1)`. Returns the first witness, or `None`
/// when the probed grid contains no match.
pub fn drift_match_search(
    f: &Expr,
    g: &Expr,
) -> Result<Option<EquivalenceTransform>, FamilyError> {
    let x = Expr::var(Var::X);
    let e1_grid: [(i64, i64); 10] = [
        (1, 1),
        (-1, 1),
        (2, 1),
        (-2, 1),
        (1, 2),
        (-1, 2),
        (3, 1),
        (-3, 1),
        (1, 3),
        (-1, 3),
    ];
    let e3_grid: [(i64, i64); 5] = [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3)];
    for &(n1, d1) in &e1_grid {
        for &(n3, d3) in &e3_grid {
            let e1 = Expr::ratio(n1, d1);
            let e3 = Expr::ratio(n3, d3);
            let xbar = e3.mul(&x.pow(&e1)?);
            let rhs = match g.subst_var(Var::X, &xbar) {
                Ok(e) => e1.mul(&e1).mul(&e),
                Err(_) => continue,
            };
            // Solve ε5·f − ε4 = rhs at two sample points, exactly.
            let mut solved = None;
            for (p, q) in [(2i64, 3i64), (5, 7)] {
                let fp = f.subst_var(Var::X, &Expr::int(p))?;
                let fq = f.subst_var(Var::X, &Expr::int(q))?;
                let rp = match rhs.subst_var(Var::X, &Expr::int(p)) {
                    Ok(e) => e,
                    Err(_) => continue,
                };
                let rq = match rhs.subst_var(Var::X, &Expr::int(q)) {
                    Ok(e) => e,
                    Err(_) => continue,
                };
                let denom = fp.sub(&fq);
                if denom.is_zero() {
                    continue;
                }
                let e5 = rp.sub(&rq).div(&denom)?;
                if e5.is_zero() {
                    continue;
                }
                let e4 = e5.mul(&fp).sub(&rp);
                solved = Some((e5, e4));
                break;
            }
            let Some((e5, e4)) = solved else { continue };
            let identity = e5.mul(f).sub(&e4).sub(&rhs);
            if identity.is_zero() {
                let t = EquivalenceTransform::new(
                    [
                        e1,
                        Expr::zero(),
                        e3,
                        e4,
                        e5,
                        Expr::zero(),
                        Expr::one(),
                    ],
                    Expr::zero(),
                )?;
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr, Var};

    use super::{
        canonicalize, drift_match_search, recognize, solve_classifying_ode, x_direction_shape,
        x_shape_equation, CanonicalShape, FamilyError, FunctionFamily,
    };

    fn param(name: &str) -> Expr {
        Expr::param(name)
    }

    #[test]
    fn recognizes_power_drifts() {
        assert_eq!(
            recognize(&parse("x").unwrap()).unwrap(),
            FunctionFamily::Power {
                k1: Expr::one(),
                n: Expr::one(),
                k2: Expr::zero()
            }
        );
        assert_eq!(
            recognize(&parse("3*x^2 + 5").unwrap()).unwrap(),
            FunctionFamily::Power {
                k1: Expr::int(3),
                n: Expr::int(2),
                k2: Expr::int(5)
            }
        );
        assert_eq!(
            recognize(&parse("1/x").unwrap()).unwrap(),
            FunctionFamily::Power {
                k1: Expr::one(),
                n: Expr::int(-1),
                k2: Expr::zero()
            }
        );
        let symbolic = param("a")
            .mul(&Expr::var(Var::X).pow(&param("n")).unwrap())
            .add(&param("b"));
        assert_eq!(
            recognize(&symbolic).unwrap(),
            FunctionFamily::Power {
                k1: param("a"),
                n: param("n"),
                k2: param("b")
            }
        );
        assert_eq!(
            recognize(&parse("7/2").unwrap()).unwrap(),
            FunctionFamily::Constant(Expr::ratio(7, 2))
        );
    }

    #[test]
    fn recognizes_log_power_drifts() {
        assert_eq!(
            recognize(&parse("ln(x)").unwrap()).unwrap(),
            FunctionFamily::LogPower {
                k1: Expr::one(),
                k2: Expr::zero(),
                n: Expr::one(),
                k3: Expr::zero()
            }
        );
        assert_eq!(
            recognize(&parse("ln(x)^3").unwrap()).unwrap(),
            FunctionFamily::LogPower {
                k1: Expr::one(),
                k2: Expr::zero(),
                n: Expr::int(3),
                k3: Expr::zero()
            }
        );
        assert_eq!(
            recognize(&parse("ln(x)^-2").unwrap_or_else(|_| {
                Expr::var(Var::X).ln().unwrap().powi(-2).unwrap()
            }))
            .unwrap(),
            FunctionFamily::LogPower {
                k1: Expr::one(),
                k2: Expr::zero(),
                n: Expr::int(-2),
                k3: Expr::zero()
            }
        );
        // 2·(ln x + 5)^2 + 3, built structurally.
        let base = Expr::var(Var::X).ln().unwrap().add(&Expr::int(5));
        let f = Expr::int(2).mul(&base.powi(2).unwrap()).add(&Expr::int(3));
        assert_eq!(
            recognize(&f).unwrap(),
            FunctionFamily::LogPower {
                k1: Expr::int(2),
                k2: Expr::int(5),
                n: Expr::int(2),
                k3: Expr::int(3)
            }
        );
        // Fully symbolic constants.
        let base = Expr::var(Var::X).ln().unwrap().add(&param("k2"));
        let f = param("k1")
            .mul(&base.pow(&param("n")).unwrap())
            .add(&param("k3"));
        assert_eq!(
            recognize(&f).unwrap(),
            FunctionFamily::LogPower {
                k1: param("k1"),
                k2: param("k2"),
                n: param("n"),
                k3: param("k3")
            }
        );
    }

    #[test]
    fn recognizes_log_log_drifts() {
        let lnlnx = Expr::var(Var::X).ln().unwrap().ln().unwrap();
        assert_eq!(
            recognize(&lnlnx).unwrap(),
            FunctionFamily::LogLog {
                k1: Expr::one(),
                k2: Expr::zero(),
                k3: Expr::zero()
            }
        );
        let inner = Expr::var(Var::X).ln().unwrap().add(&Expr::int(2));
        let f = param("a").mul(&inner.ln().unwrap()).add(&param("b"));
        assert_eq!(
            recognize(&f).unwrap(),
            FunctionFamily::LogLog {
                k1: param("a"),
                k2: Expr::int(2),
                k3: param("b")
            }
        );
    }

    #[test]
    fn rejects_out_of_family_drifts() {
        assert_eq!(
            recognize(&parse("x + ln(x)").unwrap()).unwrap(),
            FunctionFamily::Generic
        );
        assert_eq!(
            recognize(&parse("exp(x)").unwrap()).unwrap(),
            FunctionFamily::Generic
        );
        assert!(matches!(
            recognize(&parse("t*x").unwrap()),
            Err(FamilyError::NotXOnly(Var::T))
        ));
    }

    #[test]
    fn recognition_round_trips_through_reconstruction() {
        let drifts = [
            parse("x").unwrap(),
            parse("3*x^2 + 5").unwrap(),
            parse("ln(x)").unwrap(),
            parse("ln(x)^3").unwrap(),
            Expr::var(Var::X).ln().unwrap().ln().unwrap(),
        ];
        for f in &drifts {
            let fam = recognize(f).unwrap();
            let rebuilt = fam.to_expr().unwrap();
            assert!(rebuilt.sub(f).is_zero(), "{fam} rebuilt as {rebuilt}");
        }
    }

    #[test]
    fn classifying_equation_branch_solutions_are_exact() {
        // Branch 1: a2 = 0.
        let a = [param("a1"), Expr::zero(), param("a3"), param("a4")];
        let sol = solve_classifying_ode(&a).unwrap();
        assert_eq!(sol.branch, 1);
        assert!(sol.residual.is_zero(), "branch 1 residual {}", sol.residual);

        // Branch 2: all coefficients symbolic.
        let a = [param("a1"), param("a2"), param("a3"), param("a4")];
        let sol = solve_classifying_ode(&a).unwrap();
        assert_eq!(sol.branch, 2);
        assert!(sol.residual.is_zero(), "branch 2 residual {}", sol.residual);

        // Branch 3: a1 = a2 = 0.
        let a = [Expr::zero(), Expr::zero(), param("a3"), param("a4")];
        let sol = solve_classifying_ode(&a).unwrap();
        assert_eq!(sol.branch, 3);
        assert!(sol.residual.is_zero(), "branch 3 residual {}", sol.residual);

        // Branch 4: a1 = 0, a2 ≠ 0.
        let a = [Expr::zero(), param("a2"), param("a3"), param("a4")];
        let sol = solve_classifying_ode(&a).unwrap();
        assert_eq!(sol.branch, 4);
        assert!(sol.residual.is_zero(), "branch 4 residual {}", sol.residual);
    }

    #[test]
    fn classifying_equation_degenerate_patterns_error() {
        let a = [param("a1"), Expr::zero(), Expr::zero(), param("a4")];
        assert!(matches!(
            solve_classifying_ode(&a),
            Err(FamilyError::DegenerateClassifier)
        ));
        let a = [Expr::zero(), param("a2"), param("a3"), Expr::zero()];
        assert!(matches!(
            solve_classifying_ode(&a),
            Err(FamilyError::ConstantDrift)
        ));
    }

    #[test]
    fn branch_one_matches_a_numerical_integration() {
        // a1 = 1, a2 = 0, a3 = 2, a4 = 3, C = 1: f = x^(−1/2) + 3. Integrate
        // f′ = (3 − f)/(2x) from x = 1 by classical fourth-order Runge–Kutta
        // and compare against the symbolic solution at x = 2.
        let a = [Expr::int(1), Expr::zero(), Expr::int(2), Expr::int(3)];
        let sol = solve_classifying_ode(&a).unwrap();
        let f = sol.f.subst_param("C", &Expr::one()).unwrap();

        let rhs = |x: f64, y: f64| (3.0 - y) / (2.0 * x);
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut x = 1.0;
        let env = crate::expr::Env::new().var(Var::X, 1.0);
        let mut y = f.eval(&env).unwrap();
        for _ in 0..n {
            let k1 = rhs(x, y);
            let k2 = rhs(x + h / 2.0, y + h / 2.0 * k1);
            let k3 = rhs(x + h / 2.0, y + h / 2.0 * k2);
            let k4 = rhs(x + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += h;
        }
        let env = crate::expr::Env::new().var(Var::X, 2.0);
        let exact = f.eval(&env).unwrap();
        assert!(
            (y - exact).abs() <= 1e-8,
            "integrated {y} vs exact {exact}"
        );
    }

    #[test]
    fn the_forced_x_shape_solves_its_structure_equation() {
        let xi0 = Expr::fun("T", &[Expr::var(Var::T)]);
        let p = Expr::fun("P", &[Expr::var(Var::T), Expr::var(Var::Y)]);
        let xi1 = x_direction_shape(&xi0, &p).unwrap();
        let residual = x_shape_equation(&xi0, &xi1).unwrap();
        assert!(residual.is_zero(), "residual {residual}");

        // Any deviation from the forced shape leaves a nonzero residual.
        let bent = xi1.add(&parse("x^2").unwrap());
        assert!(!x_shape_equation(&xi0, &bent).unwrap().is_zero());
    }

    #[test]
    fn canonicalization_reaches_the_normal_forms() {
        let fam = FunctionFamily::Power {
            k1: param("k1"),
            n: param("n"),
            k2: param("k2"),
        };
        let canon = canonicalize(&fam).unwrap();
        assert_eq!(canon.shape, CanonicalShape::Identity);
        assert!(canon.verified, "{}", canon.description);

        let fam = FunctionFamily::LogPower {
            k1: param("k1"),
            k2: param("k2"),
            n: param("n"),
            k3: param("k3"),
        };
        let canon = canonicalize(&fam).unwrap();
        assert!(matches!(canon.shape, CanonicalShape::LogPower(_)));
        assert!(canon.verified, "{}", canon.description);

        let fam = FunctionFamily::LogLog {
            k1: param("k1"),
            k2: param("k2"),
            k3: param("k3"),
        };
        let canon = canonicalize(&fam).unwrap();
        assert_eq!(canon.shape, CanonicalShape::LogLog);
        assert!(canon.verified, "{}", canon.description);

        assert!(matches!(
            canonicalize(&FunctionFamily::Constant(Expr::int(4))),
            Err(FamilyError::ConstantDrift)
        ));
    }

    #[test]
    fn rational_canonicalizations_verify_too() {
        for f in [parse("2*x^3 + 5").unwrap(), parse("ln(x)").unwrap()] {
            let fam = recognize(&f).unwrap();
            let canon = canonicalize(&fam).unwrap();
            assert!(canon.verified, "{}", canon.description);
        }
    }

    #[test]
    fn drift_search_finds_power_to_power_matches() {
        let f = parse("x").unwrap();
        let g = parse("x^2").unwrap();
        let witness = drift_match_search(&f, &g).unwrap();
        let t = witness.expect("x and x^2 are equivalent drifts");
        // Confirm the witness satisfies the law exactly.
        let [_, xbar, _, _] = t.barred_coords().unwrap();
        let lhs = t.apply_drift(&f).unwrap();
        let rhs = g.subst_var(Var::X, &xbar).unwrap();
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn normal_forms_are_pairwise_inequivalent() {
        let x = parse("x").unwrap();
        let logn = Expr::var(Var::X).ln().unwrap().pow(&param("n")).unwrap();
        let loglog = Expr::var(Var::X).ln().unwrap().ln().unwrap();
        let pairs = [
            (&x, &logn),
            (&x, &loglog),
            (&logn, &loglog),
            (&logn, &x),
            (&loglog, &x),
            (&loglog, &logn),
        ];
        for (f, g) in pairs {
            assert!(
                drift_match_search(f, g).unwrap().is_none(),
                "{f} and {g} must not match"
            );
        }
    }
}
