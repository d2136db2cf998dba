//! Point-symmetry vector fields on the base space `(t, x, y, u)`, their
//! prolongation to second-order jet space, and the invariance residual for
//! the averaged-diffusion equation `u_t = x²·u_xx + f(x)·u_y`.
//!
//! A field `X = ξ⁰∂t + ξ¹∂x + ξ²∂y + η∂u` acts on second-order jets through
//! the prolonged coefficients `ζ_J`, built here by the recursive rule
//!
//! ```text
//! ζ_i  = D_i(η)   − Σ_v u_v     · D_i(ξ^v)
//! ζ_ik = D_k(ζ_i) − Σ_v u_{i,v} · D_k(ξ^v)
//! ```
//!
//! with `D` the total derivative. The recursive route never leaves order
//! two; the equivalent characteristic route `ζ_J = D_J(η − ξ^v u_v) +
//! ξ^v u_{J,v}` transits through order-three jets which must cancel — it is
//! kept as an independent cross-check.
//!
//! The invariance residual is the prolonged action of `X` on
//! `u_t − x²·u_xx − f(x)·u_y`, restricted to the solution manifold by
//! eliminating the `u_t` jet. Splitting that residual by jet monomials is
//! what produces the determining system (see [`crate::determining`]).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{parse, rat_int, Atom, Expr, ExprError, Jet, ParseError, Rat, Var};

/// The three base variables a jet counts derivatives against, in the order
/// used for component storage.
const BASE: [Var; 3] = [Var::T, Var::X, Var::Y];

fn first_jet(v: Var) -> Jet {
    match v {
        Var::T => Jet::new(1, 0, 0),
        Var::X => Jet::new(0, 1, 0),
        Var::Y => Jet::new(0, 0, 1),
        Var::U => unreachable!("u is the dependent variable"),
    }
}

fn bump_jet(j: Jet, v: Var) -> Jet {
    match v {
        Var::T => Jet::new(j.t + 1, j.x, j.y),
        Var::X => Jet::new(j.t, j.x + 1, j.y),
        Var::Y => Jet::new(j.t, j.x, j.y + 1),
        Var::U => unreachable!("u is the dependent variable"),
    }
}

/// Error raised while building fields or residuals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FieldError {
    /// A field coefficient contained a jet variable; coefficients live on
    /// the base space `(t, x, y, u)`.
    JetInCoefficient(Jet),
    /// The symbol the field was applied to contained a jet variable; use
    /// [`VectorField::prolong`] for jet-space objects.
    JetInOperand(Jet),
    /// The drift coefficient `f` depended on a variable other than `x`.
    DriftNotXOnly(Var),
    /// Prolongation was requested for a jet outside orders one and two.
    UnsupportedJet(Jet),
    /// An order-three jet survived an assembly that must close at order two.
    UncancelledOrder3(Jet),
    /// An underlying expression operation failed.
    Expr(ExprError),
}

impl From<ExprError> for FieldError {
    fn from(e: ExprError) -> FieldError {
        FieldError::Expr(e)
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::JetInCoefficient(j) => {
                write!(f, "field coefficient contains jet variable {j}")
            }
            FieldError::JetInOperand(j) => {
                write!(f, "operand contains jet variable {j}; not a base-space function")
            }
            FieldError::DriftNotXOnly(v) => {
                write!(f, "drift coefficient depends on {v}; it must be a function of x alone")
            }
            FieldError::UnsupportedJet(j) => {
                write!(f, "prolongation of {j} is outside the supported order range")
            }
            FieldError::UncancelledOrder3(j) => {
                write!(f, "order-three jet {j} survived an assembly that must close at order two")
            }
            FieldError::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}

/// Error raised while parsing the linear `Dt/Dx/Dy/Du` notation.
#[derive(Clone, PartialEq, Debug)]
pub enum FieldParseError {
    /// The source text failed to parse as an expression.
    Parse(ParseError),
    /// The expression was not a linear combination of `Dt`, `Dx`, `Dy`,
    /// `Du` with direction-free coefficients.
    NotLinear(String),
    /// A coefficient contained a jet variable.
    Jet(Jet),
}

impl fmt::Display for FieldParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldParseError::Parse(e) => write!(f, "{e}"),
            FieldParseError::NotLinear(what) => {
                write!(f, "not a linear combination of Dt, Dx, Dy, Du: {what}")
            }
            FieldParseError::Jet(j) => write!(f, "field coefficient contains jet variable {j}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldParseError {}

/// A point-symmetry candidate `ξ⁰∂t + ξ¹∂x + ξ²∂y + η∂u` whose coefficients
/// are expressions on the base space (they may involve `u`, parameters and
/// opaque function symbols, but never jets).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VectorField {
    xi: [Expr; 3],
    eta: Expr,
}

impl VectorField {
    /// Builds a field, rejecting coefficients that contain jet variables.
    pub fn new(xi_t: Expr, xi_x: Expr, xi_y: Expr, eta: Expr) -> Result<VectorField, FieldError> {
        for c in [&xi_t, &xi_x, &xi_y, &eta] {
            if let Some(j) = c.jets().into_iter().next() {
                return Err(FieldError::JetInCoefficient(j));
            }
        }
        Ok(VectorField { xi: [xi_t, xi_x, xi_y], eta })
    }

    pub fn zero() -> VectorField {
        VectorField {
            xi: [Expr::zero(), Expr::zero(), Expr::zero()],
            eta: Expr::zero(),
        }
    }

    /// The translation field `∂v` (for `u` this is the constant shift `∂u`).
    pub fn translation(v: Var) -> VectorField {
        let mut out = VectorField::zero();
        match v {
            Var::T => out.xi[0] = Expr::one(),
            Var::X => out.xi[1] = Expr::one(),
            Var::Y => out.xi[2] = Expr::one(),
            Var::U => out.eta = Expr::one(),
        }
        out
    }

    /// The scaling field `u∂u`.
    pub fn u_scaling() -> VectorField {
        let mut out = VectorField::zero();
        out.eta = Expr::var(Var::U);
        out
    }

    /// The shift field `β∂u` for a base-space coefficient `β`.
    pub fn u_shift(beta: Expr) -> Result<VectorField, FieldError> {
        VectorField::new(Expr::zero(), Expr::zero(), Expr::zero(), beta)
    }

    pub fn xi_t(&self) -> &Expr {
        &self.xi[0]
    }

    pub fn xi_x(&self) -> &Expr {
        &self.xi[1]
    }

    pub fn xi_y(&self) -> &Expr {
        &self.xi[2]
    }

    pub fn eta(&self) -> &Expr {
        &self.eta
    }

    /// Components in display order `(ξ⁰, ξ¹, ξ², η)`.
    pub fn components(&self) -> [&Expr; 4] {
        [&self.xi[0], &self.xi[1], &self.xi[2], &self.eta]
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            xi: [
                self.xi[0].add(&other.xi[0]),
                self.xi[1].add(&other.xi[1]),
                self.xi[2].add(&other.xi[2]),
            ],
            eta: self.eta.add(&other.eta),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            xi: [
                self.xi[0].sub(&other.xi[0]),
                self.xi[1].sub(&other.xi[1]),
                self.xi[2].sub(&other.xi[2]),
            ],
            eta: self.eta.sub(&other.eta),
        }
    }

    pub fn scale(&self, c: &Rat) -> VectorField {
        VectorField {
            xi: [
                self.xi[0].scale(c),
                self.xi[1].scale(c),
                self.xi[2].scale(c),
            ],
            eta: self.eta.scale(c),
        }
    }

    /// Scales by a constant expression (parameters allowed, variables not).
    pub fn scale_expr(&self, c: &Expr) -> VectorField {
        VectorField {
            xi: [
                self.xi[0].mul(c),
                self.xi[1].mul(c),
                self.xi[2].mul(c),
            ],
            eta: self.eta.mul(c),
        }
    }

    /// Applies the field as a first-order operator to a base-space function:
    /// `X(w) = ξ⁰w_t + ξ¹w_x + ξ²w_y + ηw_u`.
    pub fn apply(&self, w: &Expr) -> Result<Expr, FieldError> {
        if let Some(j) = w.jets().into_iter().next() {
            return Err(FieldError::JetInOperand(j));
        }
        let mut out = Expr::zero();
        for (i, v) in BASE.iter().enumerate() {
            out = out.add(&self.xi[i].mul(&w.diff(*v)));
        }
        Ok(out.add(&self.eta.mul(&w.diff(Var::U))))
    }

    /// First prolonged coefficient `ζ_i`.
    fn zeta1(&self, i: Var) -> Result<Expr, FieldError> {
        let mut z = self.eta.total_derivative(i)?;
        for (k, v) in BASE.iter().enumerate() {
            let u_v = Expr::jet(first_jet(*v));
            z = z.sub(&u_v.mul(&self.xi[k].total_derivative(i)?));
        }
        Ok(z)
    }

    /// Second prolonged coefficient `ζ_{ik}` (symmetric in `i`, `k`).
    fn zeta2(&self, i: Var, k: Var) -> Result<Expr, FieldError> {
        let zi = self.zeta1(i)?;
        let mut z = zi.total_derivative(k)?;
        for (idx, v) in BASE.iter().enumerate() {
            let u_iv = Expr::jet(bump_jet(first_jet(i), *v));
            z = z.sub(&u_iv.mul(&self.xi[idx].total_derivative(k)?));
        }
        Ok(z)
    }

    /// The prolonged coefficient `ζ_J` for a first- or second-order jet,
    /// via the recursive rule (never leaves order two).
    pub fn prolong(&self, j: Jet) -> Result<Expr, FieldError> {
        match j.order() {
            1 => {
                let v = if j.t == 1 {
                    Var::T
                } else if j.x == 1 {
                    Var::X
                } else {
                    Var::Y
                };
                self.zeta1(v)
            }
            2 => {
                // Peel the largest variable; ζ is symmetric, so the choice
                // only fixes the evaluation order deterministically.
                let (k, rest) = if j.y > 0 {
                    (Var::Y, Jet::new(j.t, j.x, j.y - 1))
                } else if j.x > 0 {
                    (Var::X, Jet::new(j.t, j.x - 1, j.y))
                } else {
                    (Var::T, Jet::new(j.t - 1, j.x, j.y))
                };
                let i = if rest.t > 0 {
                    Var::T
                } else if rest.x > 0 {
                    Var::X
                } else {
                    Var::Y
                };
                self.zeta2(i, k)
            }
            _ => Err(FieldError::UnsupportedJet(j)),
        }
    }

    /// The same coefficient assembled through the characteristic
    /// `Q = η − ξ^v u_v`: `ζ_J = D_J(Q) + ξ^v u_{J,v}`. This route transits
    /// through order-three jets; they must cancel, and their survival is a
    /// hard error. Kept as an independent cross-check of [`Self::prolong`].
    pub fn prolong_characteristic(&self, j: Jet) -> Result<Expr, FieldError> {
        if j.order() == 0 || j.order() > 2 {
            return Err(FieldError::UnsupportedJet(j));
        }
        let mut q = self.eta.clone();
        for (k, v) in BASE.iter().enumerate() {
            q = q.sub(&self.xi[k].mul(&Expr::jet(first_jet(*v))));
        }
        let mut dq = q;
        for _ in 0..j.t {
            dq = dq.total_derivative(Var::T)?;
        }
        for _ in 0..j.x {
            dq = dq.total_derivative(Var::X)?;
        }
        for _ in 0..j.y {
            dq = dq.total_derivative(Var::Y)?;
        }
        let mut z = dq;
        for (k, v) in BASE.iter().enumerate() {
            z = z.add(&self.xi[k].mul(&Expr::jet(bump_jet(j, *v))));
        }
        if let Some(bad) = z.jets().into_iter().find(|j| j.order() > 2) {
            return Err(FieldError::UncancelledOrder3(bad));
        }
        Ok(z)
    }

    /// The invariance residual of the field against `u_t = x²u_xx + f(x)u_y`,
    /// restricted to the solution manifold.
    ///
    /// This is the prolonged action on `Δ = u_t − x²u_xx − f·u_y`,
    ///
    /// ```text
    /// ζ_t − x²ζ_xx − f·ζ_y − ξ¹·(2x·u_xx + f′·u_y),
    /// ```
    ///
    /// with the `u_t` jet then eliminated through the equation itself. The
    /// result is polynomial in the remaining jets; the field is a symmetry
    /// exactly when it vanishes identically.
    pub fn lie_residual(&self, f: &Expr) -> Result<Expr, FieldError> {
        validate_drift(f)?;
        let fp = f.diff(Var::X);
        let zt = self.prolong(Jet::new(1, 0, 0))?;
        let zy = self.prolong(Jet::new(0, 0, 1))?;
        let zxx = self.prolong(Jet::new(0, 2, 0))?;

        let x = Expr::var(Var::X);
        let x2 = x.mul(&x);
        let uxx = Expr::jet(Jet::new(0, 2, 0));
        let uy = Expr::jet(Jet::new(0, 0, 1));

        // Action on the coefficients of Δ: X(x²) = 2x·ξ¹, X(f) = f′·ξ¹.
        let coeff_action = self.xi[1]
            .mul(&x.scale(&rat_int(2)).mul(&uxx).add(&fp.mul(&uy)));

        let e = zt
            .sub(&x2.mul(&zxx))
            .sub(&f.mul(&zy))
            .sub(&coeff_action);

        let on_manifold = x2.mul(&uxx).add(&f.mul(&uy));
        let e = e.subst_jet(Jet::new(1, 0, 0), &on_manifold)?;

        for j in e.jets() {
            if j.order() > 2 {
                return Err(FieldError::UncancelledOrder3(j));
            }
            debug_assert!(j != Jet::new(1, 0, 0), "u_t must be eliminated");
        }
        Ok(e)
    }

    /// Parses the linear `Dt/Dx/Dy/Du` notation, e.g.
    /// `x*y*Dx + 1/2*y^2*Dy + 1/2*x*u*Du`.
    pub fn parse(src: &str) -> Result<VectorField, FieldParseError> {
        let e = parse(src).map_err(FieldParseError::Parse)?;
        let directions = ["Dt", "Dx", "Dy", "Du"];
        let is_direction =
            |a: &Atom| matches!(a, Atom::Param(p) if directions.contains(&p.name()));
        let grouped = e
            .collect(&is_direction)
            .map_err(|err| FieldParseError::NotLinear(alloc::format!("{err}")))?;
        if !grouped.constant_part().is_zero() {
            return Err(FieldParseError::NotLinear(String::from(
                "terms without a direction marker",
            )));
        }
        let mut comps = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()];
        for (mono, coeff) in grouped.iter() {
            let mut names = Vec::new();
            for (a, e) in &mono.powers {
                if let Atom::Param(p) = a {
                    names.push(p.name());
                }
                if !e.is_one() {
                    return Err(FieldParseError::NotLinear(String::from(
                        "direction marker raised to a power",
                    )));
                }
            }
            if names.len() != 1 {
                return Err(FieldParseError::NotLinear(String::from(
                    "product of direction markers",
                )));
            }
            let slot = directions.iter().position(|d| *d == names[0]).unwrap();
            if let Some(j) = coeff.jets().into_iter().next() {
                return Err(FieldParseError::Jet(j));
            }
            comps[slot] = coeff.clone();
        }
        let [xi_t, xi_x, xi_y, eta] = comps;
        Ok(VectorField { xi: [xi_t, xi_x, xi_y], eta })
    }
}

fn validate_drift(f: &Expr) -> Result<(), FieldError> {
    for v in [Var::T, Var::Y, Var::U] {
        if f.depends_on(v) {
            return Err(FieldError::DriftNotXOnly(v));
        }
    }
    if let Some(j) = f.jets().into_iter().next() {
        return Err(FieldError::JetInOperand(j));
    }
    Ok(())
}

impl fmt::Display for VectorField {
    /// Prints the linear `Dt/Dx/Dy/Du` notation; the output reparses to the
    /// same field through [`VectorField::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = ["Dt", "Dx", "Dy", "Du"];
        let mut first = true;
        for (c, name) in self.components().into_iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "({c})*{name}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use alloc::string::ToString;
    use alloc::vec::Vec;

    use crate::expr::{parse, rat, Expr, Jet, Var};
    use crate::rng::SplitMix64;

    use super::{FieldError, VectorField};

    fn jets_of_interest() -> Vec<Jet> {
        [
            Jet::new(1, 0, 0),
            Jet::new(0, 1, 0),
            Jet::new(0, 0, 1),
            Jet::new(0, 2, 0),
            Jet::new(1, 1, 0),
            Jet::new(0, 1, 1),
            Jet::new(2, 0, 0),
            Jet::new(0, 0, 2),
            Jet::new(1, 0, 1),
        ]
        .into()
    }

    #[test]
    fn translations_prolong_to_zero() {
        for v in [Var::T, Var::Y] {
            let x = VectorField::translation(v);
            for j in jets_of_interest() {
                assert!(x.prolong(j).unwrap().is_zero(), "ζ_{j} of ∂{v}");
            }
        }
    }

    #[test]
    fn u_scaling_prolongs_to_the_jet_itself() {
        let x = VectorField::u_scaling();
        for j in jets_of_interest() {
            assert_eq!(x.prolong(j).unwrap(), Expr::jet(j));
        }
    }

    #[test]
    fn recursive_and_characteristic_routes_agree() {
        // A coefficient mix exercising t, x, y, u and a logarithm.
        let x = VectorField::new(
            parse("t^2").unwrap(),
            parse("x*y + t*x*ln(x)").unwrap(),
            parse("3*t*y").unwrap(),
            parse("(ln(x)^2 + y)*u").unwrap(),
        )
        .unwrap();
        for j in jets_of_interest() {
            let a = x.prolong(j).unwrap();
            let b = x.prolong_characteristic(j).unwrap();
            assert!(a.sub(&b).is_zero(), "routes disagree at ζ_{j}");
        }
    }

    #[test]
    fn prolongation_is_linear_in_the_field() {
        let x = VectorField::new(
            parse("t").unwrap(),
            parse("x*ln(x)").unwrap(),
            parse("y^2").unwrap(),
            parse("u*ln(x)").unwrap(),
        )
        .unwrap();
        let y = VectorField::new(
            parse("y").unwrap(),
            parse("t*x").unwrap(),
            parse("t + y").unwrap(),
            parse("x*u + t").unwrap(),
        )
        .unwrap();
        let mut rng = SplitMix64::new(0x11_22);
        for _ in 0..4 {
            let (an, ad) = rng.rational(6, 4);
            let (bn, bd) = rng.rational(6, 4);
            let (a, b) = (rat(an, ad.max(1)), rat(bn, bd.max(1)));
            let combined = x.scale(&a).add(&y.scale(&b));
            for j in [Jet::new(0, 2, 0), Jet::new(1, 1, 0), Jet::new(0, 1, 1)] {
                let lhs = combined.prolong(j).unwrap();
                let rhs = x.prolong(j).unwrap().scale(&a).add(&y.prolong(j).unwrap().scale(&b));
                assert!(lhs.sub(&rhs).is_zero(), "nonlinear at ζ_{j}");
            }
        }
    }

    #[test]
    fn kernel_fields_have_zero_residual_for_opaque_drift() {
        let f = Expr::fun("f", &[Expr::var(Var::X)]);
        for x in [
            VectorField::translation(Var::T),
            VectorField::translation(Var::Y),
            VectorField::u_scaling(),
        ] {
            assert!(x.lie_residual(&f).unwrap().is_zero());
        }
    }

    #[test]
    fn shift_field_residual_is_the_free_equation() {
        let f = Expr::fun("f", &[Expr::var(Var::X)]);
        let beta = Expr::fun("beta", &[Expr::var(Var::T), Expr::var(Var::X)]);
        let x = VectorField::u_shift(beta).unwrap();
        let residual = x.lie_residual(&f).unwrap();
        let expected = parse("beta[1,0](t,x) - x^2*beta[0,2](t,x)").unwrap();
        assert_eq!(residual, expected);
    }

    #[test]
    fn scaling_pair_is_a_symmetry_of_the_linear_drift() {
        // x∂x + y∂y and xy∂x + ½y²∂y + ½xu∂u for f(x) = x.
        let f = Expr::var(Var::X);
        let g4 = VectorField::parse("x*Dx + y*Dy").unwrap();
        let g5 = VectorField::parse("x*y*Dx + 1/2*y^2*Dy + 1/2*x*u*Du").unwrap();
        assert!(g4.lie_residual(&f).unwrap().is_zero());
        assert!(g5.lie_residual(&f).unwrap().is_zero());
        // And not of an unrelated drift.
        let wrong = parse("x^3").unwrap();
        assert!(!g5.lie_residual(&wrong).unwrap().is_zero());
    }

    #[test]
    fn drift_validation_rejects_other_variables() {
        let x = VectorField::translation(Var::T);
        let bad = parse("x + y").unwrap();
        assert_eq!(
            x.lie_residual(&bad).unwrap_err(),
            FieldError::DriftNotXOnly(Var::Y)
        );
    }

    #[test]
    fn display_round_trips_through_parse() {
        let texts = [
            "Dt",
            "x*Dx + y*Dy",
            "x*y*Dx + 1/2*y^2*Dy + 1/2*x*u*Du",
            "(t^2)*Dt + ((t*ln(x) - 3*y)*x)*Dx + (3*t*y)*Dy",
        ];
        for t in texts {
            let v = VectorField::parse(t).unwrap();
            let reprinted = v.to_string();
            let w = VectorField::parse(&reprinted).unwrap();
            assert_eq!(v, w, "{t} → {reprinted}");
        }
    }

    #[test]
    fn parse_rejects_nonlinear_direction_use() {
        assert!(VectorField::parse("Dt*Dx").is_err());
        assert!(VectorField::parse("Dt^2").is_err());
        assert!(VectorField::parse("x + Dt").is_err());
        assert!(VectorField::parse("u_x*Dt").is_err());
    }
}
