//! Symmetry reduction: turning an admitted generator into an invariant
//! ansatz and a PDE in one variable fewer.
//!
//! The automated family covers `X = a·∂t + b·∂y + λ·u∂u` with constant
//! (possibly symbolic) `a`, `b`, `λ` — the span of the translations and the
//! `u`-scaling that every drift admits.  Invariance of `u` under the flow
//! singles out
//!
//! * `a = 0, b ≠ 0`:  `u = e^{(λ/b)·y}·w(t, x)` with
//!   `w_t = x²·w_xx + (λ/b)·f·w`;
//! * `a ≠ 0`:  `u = e^{(λ/a)·t}·w(x, s)`, `s = y − (b/a)·t`, with
//!   `x²·w_ss… = 0` rearranged as `x²·w_xx + (f + b/a)·w_s − (λ/a)·w = 0`
//!   (stationary in the moving frame);
//! * `a = b = 0, λ ≠ 0`: the invariance condition degenerates to `u = 0` —
//!   there are no invariant solutions to reduce to.
//!
//! Every returned reduction is *verified*: the ansatz is substituted back
//! into the equation symbolically and shown to factor as an invertible
//! weight times the reduced equation, so the claim is an identity, not a
//! transcription.  Generators outside the family are not guessed at; the
//! caller receives their characteristic system to integrate by hand.

use alloc::format;
use alloc::string::String;

use crate::expr::{Expr, ExprError, Var};
use crate::field::VectorField;

/// Why no reduction was produced.
#[derive(Clone, Debug, PartialEq)]
pub enum ReduceError {
    ZeroField,
    /// `X = λ·u∂u` alone: invariance forces `u = 0`.
    NoInvariantSolutions,
    Expr(ExprError),
}

impl From<ExprError> for ReduceError {
    fn from(e: ExprError) -> ReduceError {
        ReduceError::Expr(e)
    }
}

impl core::fmt::Display for ReduceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ReduceError::ZeroField => write!(f, "the zero field generates nothing to reduce by"),
            ReduceError::NoInvariantSolutions => write!(
                f,
                "invariance under a pure u-scaling forces u = 0; there are \
                 no invariant solutions"
            ),
            ReduceError::Expr(e) => write!(f, "expression error: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ReduceError {}

/// A verified invariant-solution reduction.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// `u` in original coordinates, with the opaque symbol `w` carrying the
    /// remaining freedom.
    pub ansatz: Expr,
    /// The reduced equation, `= 0`, written in `w`'s own arguments.
    pub reduced: Expr,
    /// Human-readable statement of the ansatz and reduced equation.
    pub description: String,
    /// The invertible factor by which the substituted equation and the
    /// reduced equation differ.
    pub weight: Expr,
    /// Whether the back-substitution identity was established symbolically
    /// (always true for a returned reduction; recorded for reporting).
    pub verified: bool,
}

/// Outcome of attempting a reduction.
#[derive(Clone, Debug)]
pub enum ReduceOutcome {
    Reduced(Reduction),
    /// The generator lies outside the automated family; its invariants are
    /// the first integrals of this characteristic system.
    Characteristics(String),
}

/// The characteristic system `dt/ξ⁰ = dx/ξ¹ = dy/ξ² = du/η` of a generator.
pub fn characteristic_system(field: &VectorField) -> String {
    format!(
        "dt/({}) = dx/({}) = dy/({}) = du/({})",
        field.xi_t(),
        field.xi_x(),
        field.xi_y(),
        field.eta()
    )
}

/// Recognize `X = a·∂t + b·∂y + λ·u·∂u` with constant coefficients;
/// returns `(a, b, λ)`.
fn constant_profile(field: &VectorField) -> Option<(Expr, Expr, Expr)> {
    let a = field.xi_t().clone();
    let b = field.xi_y().clone();
    if !(a.is_param_only() && b.is_param_only() && field.xi_x().is_zero()) {
        return None;
    }
    let eta = field.eta();
    let lambda = eta.diff(Var::U);
    if !lambda.is_param_only() {
        return None;
    }
    if !eta.sub(&lambda.mul(&Expr::var(Var::U))).is_zero() {
        return None;
    }
    Some((a, b, lambda))
}

/// Substitute the ansatz into `u_t − x²·u_xx − f·u_y`.
fn substituted_equation(ansatz: &Expr, drift: &Expr) -> Expr {
    let x = Expr::var(Var::X);
    ansatz
        .diff(Var::T)
        .sub(&x.mul(&x).mul(&ansatz.diff(Var::X).diff(Var::X)))
        .sub(&drift.mul(&ansatz.diff(Var::Y)))
}

/// Reduce the equation with drift `f` by the generator `field`.
///
/// Constant-coefficient combinations of `∂t`, `∂y` and `u∂u` produce a
/// verified [`Reduction`]; anything else returns its characteristic system.
pub fn reduce(field: &VectorField, drift: &Expr) -> Result<ReduceOutcome, ReduceError> {
    if field.is_zero() {
        return Err(ReduceError::ZeroField);
    }
    let Some((a, b, lambda)) = constant_profile(field) else {
        return Ok(ReduceOutcome::Characteristics(characteristic_system(field)));
    };

    let t = Expr::var(Var::T);
    let x = Expr::var(Var::X);
    let y = Expr::var(Var::Y);

    if a.is_zero() && b.is_zero() {
        return Err(ReduceError::NoInvariantSolutions);
    }

    let (ansatz, reduced, weight, description) = if a.is_zero() {
        // u = e^{(λ/b)·y}·w(t, x);  w_t = x²·w_xx + (λ/b)·f·w.
        let rate = lambda.div(&b)?;
        let weight = rate.mul(&y).exp();
        let w = Expr::fun("w", &[t.clone(), x.clone()]);
        let ansatz = weight.mul(&w);
        let args = [t.clone(), x.clone()];
        let reduced = Expr::fun_deriv("w", &[1, 0], &args)
            .sub(&x.mul(&x).mul(&Expr::fun_deriv("w", &[0, 2], &args)))
            .sub(&rate.mul(drift).mul(&w));
        let description = format!(
            "u = exp(({rate})*y) * w(t, x); \
             w_t = x^2*w_xx + ({rate})*f*w with f = {drift}"
        );
        (ansatz, reduced, weight, description)
    } else {
        // u = e^{(λ/a)·t}·w(x, s), s = y − (b/a)·t;
        // x²·w_xx + (f + b/a)·w_s − (λ/a)·w = 0.
        let rate = lambda.div(&a)?;
        let speed = b.div(&a)?;
        let s = y.sub(&speed.mul(&t));
        let weight = rate.mul(&t).exp().scale(&crate::expr::rat_int(-1));
        let args = [x.clone(), s];
        let w = Expr::fun("w", &args);
        let ansatz = rate.mul(&t).exp().mul(&w);
        let reduced = x
            .mul(&x)
            .mul(&Expr::fun_deriv("w", &[2, 0], &args))
            .add(&drift.add(&speed).mul(&Expr::fun_deriv("w", &[0, 1], &args)))
            .sub(&rate.mul(&w));
        let description = format!(
            "u = exp(({rate})*t) * w(x, s), s = y - ({speed})*t; \
             x^2*w_xx + (f + ({speed}))*w_s - ({rate})*w = 0 with f = {drift}"
        );
        (ansatz, reduced, weight, description)
    };

    let delta = substituted_equation(&ansatz, drift);
    let verified = delta.sub(&weight.mul(&reduced)).is_zero();
    debug_assert!(verified, "back-substitution identity failed");

    Ok(ReduceOutcome::Reduced(Reduction {
        ansatz,
        reduced,
        description,
        weight,
        verified,
    }))
}

#[cfg(test)]
mod tests {
    use super::{characteristic_system, reduce, ReduceError, ReduceOutcome};
    use crate::expr::{parse, Expr, Var};
    use crate::field::VectorField;

    fn reduced(field: &VectorField, drift: &Expr) -> super::Reduction {
        match reduce(field, drift).unwrap() {
            ReduceOutcome::Reduced(r) => r,
            ReduceOutcome::Characteristics(c) => panic!("expected a reduction, got {c}"),
        }
    }

    #[test]
    fn traveling_frame_reduction_for_a_time_translation_mix() {
        // X = ∂t + c·∂y against an opaque drift: the reduced equation is
        // stationary in the frame moving with speed c.
        let field = VectorField::new(
            Expr::one(),
            Expr::zero(),
            Expr::param("c"),
            Expr::zero(),
        )
        .unwrap();
        let drift = Expr::fun("f", &[Expr::var(Var::X)]);
        let r = reduced(&field, &drift);
        assert!(r.verified);
        // x²·w_xx + (f + c)·w_s with no zeroth-order term.
        let x = Expr::var(Var::X);
        let s = Expr::var(Var::Y).sub(&Expr::param("c").mul(&Expr::var(Var::T)));
        let args = [x.clone(), s];
        let wanted = x
            .mul(&x)
            .mul(&Expr::fun_deriv("w", &[2, 0], &args))
            .add(&drift.add(&Expr::param("c")).mul(&Expr::fun_deriv("w", &[0, 1], &args)));
        assert!(r.reduced.sub(&wanted).is_zero(), "reduced: {}", r.reduced);
        assert!(r.description.contains("s = y"));
    }

    #[test]
    fn exponential_y_profile_for_a_y_translation_scaling_mix() {
        // X = 2·∂y + 3·u∂u:  u = e^{(3/2)y}·w(t,x),
        // w_t = x²·w_xx + (3/2)·f·w.
        let field = VectorField::parse("2*Dy + 3*u*Du").unwrap();
        let drift = parse("x").unwrap();
        let r = reduced(&field, &drift);
        assert!(r.verified);
        let (t, x) = (Expr::var(Var::T), Expr::var(Var::X));
        let args = [t, x.clone()];
        let wanted = Expr::fun_deriv("w", &[1, 0], &args)
            .sub(&x.mul(&x).mul(&Expr::fun_deriv("w", &[0, 2], &args)))
            .sub(&Expr::ratio(3, 2).mul(&x).mul(&Expr::fun("w", &args)));
        assert!(r.reduced.sub(&wanted).is_zero(), "reduced: {}", r.reduced);
    }

    #[test]
    fn pure_time_translation_drops_t_entirely() {
        let field = VectorField::translation(Var::T);
        let drift = parse("ln(x)").unwrap();
        let r = reduced(&field, &drift);
        assert!(r.verified);
        // No exponential weight and no zeroth-order term: the ansatz is
        // u = w(x, y) up to sign conventions in the weight.
        assert!(!r.ansatz.depends_on(Var::T));
    }

    #[test]
    fn pure_u_scaling_admits_no_invariant_solutions() {
        let field = VectorField::u_scaling();
        let drift = parse("x").unwrap();
        assert_eq!(
            reduce(&field, &drift).unwrap_err(),
            ReduceError::NoInvariantSolutions
        );
    }

    #[test]
    fn fields_outside_the_family_get_their_characteristic_system() {
        let field = VectorField::parse("x*Dx - t*Dy").unwrap();
        let drift = parse("ln(x)").unwrap();
        match reduce(&field, &drift).unwrap() {
            ReduceOutcome::Characteristics(c) => {
                assert_eq!(c, characteristic_system(&field));
                assert!(c.contains("dx/(x)"), "{c}");
            }
            ReduceOutcome::Reduced(r) => panic!("unexpected reduction: {}", r.description),
        }
    }

    #[test]
    fn zero_fields_are_rejected() {
        let drift = parse("x").unwrap();
        assert_eq!(
            reduce(&VectorField::zero(), &drift).unwrap_err(),
            ReduceError::ZeroField
        );
    }
}
