//! The bridge between the pricing equation and its canonical form.
//!
//! The average-strike pricing problem
//!
//! ```text
//! V_τ + ½σ²S²·V_SS + r·S·V_S + f(S)·V_A − r·V = 0
//! ```
//!
//! (τ time, S spot, A running average) maps onto `u_t = x²u_xx + f(x)u_y`
//! through
//!
//! ```text
//! u(t,x,y) = x^m·e^(q·t)·V(T − 2t/σ², x, 2y/σ²),   m = r/σ², q = m² + m.
//! ```
//!
//! [`FinancialModel::correspondence`] proves this by direct computation:
//! the canonical residual of the substituted `V` equals
//! `−(2/σ²)·x^m·e^(qt)` times the pricing residual, identically in an
//! opaque `V` and an opaque drift. The exhibit keeps `m` and `q` symbolic
//! first, showing exactly which coefficients the two defining relations
//! kill.

use alloc::vec::Vec;
use core::fmt;

use crate::expr::{rat, Expr, ExprError, Var};

/// Error raised while building or checking a financial model.
#[derive(Clone, PartialEq, Debug)]
pub enum FinanceError {
    /// A model constant that must be positive was given as a nonpositive
    /// rational.
    NonPositive(&'static str),
    /// A model constant was not constant.
    NonConstant(&'static str),
    /// An expression operation failed.
    Expr(ExprError),
}

impl From<ExprError> for FinanceError {
    fn from(e: ExprError) -> Self {
        FinanceError::Expr(e)
    }
}

impl fmt::Display for FinanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinanceError::NonPositive(name) => write!(f, "{name} must be positive"),
            FinanceError::NonConstant(name) => write!(f, "{name} must be a constant"),
            FinanceError::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FinanceError {}

/// Interest rate, volatility and maturity of the pricing problem. The
/// constants may be symbolic parameters (assumed positive) or explicit
/// rationals (checked).
#[derive(Clone, PartialEq, Debug)]
pub struct FinancialModel {
    pub r: Expr,
    pub sigma: Expr,
    pub term: Expr,
}

fn check_positive(e: &Expr, name: &'static str) -> Result<(), FinanceError> {
    if !e.is_param_only() {
        return Err(FinanceError::NonConstant(name));
    }
    if let Some(v) = e.as_rational() {
        if v <= rat(0, 1) {
            return Err(FinanceError::NonPositive(name));
        }
    }
    Ok(())
}

impl FinancialModel {
    pub fn new(r: Expr, sigma: Expr, term: Expr) -> Result<Self, FinanceError> {
        if !r.is_param_only() {
            return Err(FinanceError::NonConstant("interest rate"));
        }
        check_positive(&sigma, "volatility")?;
        check_positive(&term, "maturity")?;
        Ok(FinancialModel { r, sigma, term })
    }

    /// The model with symbolic constants `r`, `sigma`, `T`.
    pub fn symbolic() -> Self {
        FinancialModel {
            r: Expr::param("r"),
            sigma: Expr::param("sigma"),
            term: Expr::param("T"),
        }
    }

    fn sigma_sq(&self) -> Expr {
        self.sigma.mul(&self.sigma)
    }

    /// The scaling exponent `m = r/σ²`.
    pub fn m(&self) -> Result<Expr, FinanceError> {
        Ok(self.r.div(&self.sigma_sq())?)
    }

    /// The time-scaling exponent `q = m² + m`.
    pub fn q(&self) -> Result<Expr, FinanceError> {
        let m = self.m()?;
        Ok(m.mul(&m).add(&m))
    }

    /// The canonical arguments `(T − 2t/σ², x, 2y/σ²)` the pricing function
    /// is evaluated at inside the canonical chart.
    pub fn canonical_args(&self) -> Result<[Expr; 3], FinanceError> {
        let two = Expr::int(2);
        let tau = self
            .term
            .sub(&two.mul(&Expr::var(Var::T)).div(&self.sigma_sq())?);
        let avg = two.mul(&Expr::var(Var::Y)).div(&self.sigma_sq())?;
        Ok([tau, Expr::var(Var::X), avg])
    }

    /// The prefactor `x^m·e^(qt)`.
    pub fn prefactor(&self) -> Result<Expr, FinanceError> {
        let x = Expr::var(Var::X);
        let t = Expr::var(Var::T);
        Ok(x.pow(&self.m()?)?.mul(&self.q()?.mul(&t).exp()))
    }

    /// Maps a pricing-chart expression `V(τ, S, A)` (written in the
    /// variables `t = τ`, `x = S`, `y = A`) to the canonical chart.
    pub fn to_canonical(&self, v: &Expr) -> Result<Expr, FinanceError> {
        let [tau, _, avg] = self.canonical_args()?;
        let moved = v.subst_var(Var::T, &tau)?.subst_var(Var::Y, &avg)?;
        Ok(self.prefactor()?.mul(&moved))
    }

    /// Maps a canonical-chart expression `u(t, x, y)` back to the pricing
    /// chart (variables `t = τ`, `x = S`, `y = A`).
    pub fn from_canonical(&self, u: &Expr) -> Result<Expr, FinanceError> {
        let half_sq = self.sigma_sq().scale(&rat(1, 2));
        let t_of_tau = half_sq.mul(&self.term.sub(&Expr::var(Var::T)));
        let y_of_avg = half_sq.mul(&Expr::var(Var::Y));
        let moved = u
            .subst_var(Var::T, &t_of_tau)?
            .subst_var(Var::Y, &y_of_avg)?;
        let x = Expr::var(Var::X);
        let unscale = x
            .pow(&Expr::zero().sub(&self.m()?))?
            .mul(&Expr::zero().sub(&self.q()?.mul(&t_of_tau)).exp());
        Ok(unscale.mul(&moved))
    }

    /// The pricing residual `V_τ + ½σ²S²V_SS + rSV_S + fV_A − rV`,
    /// evaluated on an opaque `V` at the canonical arguments.
    fn pricing_residual(&self) -> Result<Expr, FinanceError> {
        let args = self.canonical_args()?;
        let v = Expr::fun("V", &args);
        let v_tau = Expr::fun_deriv("V", &[1, 0, 0], &args);
        let v_s = Expr::fun_deriv("V", &[0, 1, 0], &args);
        let v_ss = Expr::fun_deriv("V", &[0, 2, 0], &args);
        let v_a = Expr::fun_deriv("V", &[0, 0, 1], &args);
        let x = Expr::var(Var::X);
        let f = Expr::fun("f", &[x.clone()]);
        let half = Expr::ratio(1, 2);
        Ok(v_tau
            .add(&half.mul(&self.sigma_sq()).mul(&x).mul(&x).mul(&v_ss))
            .add(&self.r.mul(&x).mul(&v_s))
            .add(&f.mul(&v_a))
            .sub(&self.r.mul(&v)))
    }

    /// The canonical residual `u_t − x²u_xx − f·u_y` of the substituted
    /// pricing function, with the scaling exponents kept as free parameters
    /// `m`, `q`.
    fn canonical_residual_free(&self) -> Result<Expr, FinanceError> {
        let args = self.canonical_args()?;
        let v = Expr::fun("V", &args);
        let x = Expr::var(Var::X);
        let t = Expr::var(Var::T);
        let u = x
            .pow(&Expr::param("m"))?
            .mul(&Expr::param("q").mul(&t).exp())
            .mul(&v);
        let u_t = u.diff(Var::T);
        let u_xx = u.diff(Var::X).diff(Var::X);
        let u_y = u.diff(Var::Y);
        let f = Expr::fun("f", &[x.clone()]);
        Ok(u_t.sub(&x.mul(&x).mul(&u_xx)).sub(&f.mul(&u_y)))
    }

    /// Proves the correspondence and returns the exhibit.
    pub fn correspondence(&self) -> Result<Correspondence, FinanceError> {
        let m = self.m()?;
        let q = self.q()?;
        let defect_free = self.canonical_residual_free()?.add(
            &Expr::int(2)
                .div(&self.sigma_sq())?
                .mul(&Expr::var(Var::X).pow(&Expr::param("m"))?)
                .mul(&Expr::param("q").mul(&Expr::var(Var::T)).exp())
                .mul(&self.pricing_residual()?),
        );

        // Group by the opaque pricing-function atoms and read off the two
        // surviving coefficients.
        let collected = defect_free
            .collect(&|a| matches!(a, crate::expr::Atom::Fun(app) if app.sym.name() == "V"))
            .map_err(|_| FinanceError::NonConstant("collect"))?;
        let coeff_of = |deriv: [u8; 3]| -> Expr {
            for (key, coeff) in collected.iter() {
                let only: Vec<&crate::expr::Atom> = key.powers.keys().collect();
                if let [crate::expr::Atom::Fun(app)] = only[..] {
                    let mut d = app.deriv.clone();
                    d.resize(3, 0);
                    if app.sym.name() == "V" && d == deriv {
                        return coeff.clone();
                    }
                }
            }
            Expr::zero()
        };
        let v_s_before = coeff_of([0, 1, 0]);
        let v_before = coeff_of([0, 0, 0]);

        let subst = |e: &Expr| -> Result<Expr, FinanceError> {
            Ok(e.subst_param("m", &m)?.subst_param("q", &q)?)
        };
        let v_s_after = subst(&v_s_before)?;
        let v_after = subst(&v_before)?;
        let defect = subst(&defect_free)?;

        Ok(Correspondence {
            multiplier: Expr::zero().sub(
                &Expr::int(2)
                    .div(&self.sigma_sq())?
                    .mul(&self.prefactor()?),
            ),
            exact: defect.is_zero(),
            v_s_before,
            v_before,
            v_s_after,
            v_after,
        })
    }
}

/// Outcome of the correspondence proof: the canonical residual equals
/// `multiplier` times the pricing residual.
#[derive(Clone, Debug)]
pub struct Correspondence {
    /// `−(2/σ²)·x^m·e^(qt)`.
    pub multiplier: Expr,
    /// The defect vanished identically after substituting `m`, `q`.
    pub exact: bool,
    /// Coefficient of `V_S` with `m`, `q` free: `2x·(r/σ² − m)·x^m·e^(qt)`
    /// up to normalization — killed by `m = r/σ²`.
    pub v_s_before: Expr,
    /// Coefficient of `V` with `m`, `q` free — killed by `q = m² + m` once
    /// `m` is set.
    pub v_before: Expr,
    /// The same coefficients after substitution (identically zero).
    pub v_s_after: Expr,
    pub v_after: Expr,
}

impl Correspondence {
    /// True when the exhibit shows genuine cancellations: both coefficients
    /// are nonzero while `m`, `q` are free and vanish after substitution.
    pub fn cancellation_shown(&self) -> bool {
        !self.v_s_before.is_zero()
            && !self.v_before.is_zero()
            && self.v_s_after.is_zero()
            && self.v_after.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{Expr, Var};

    use super::{FinanceError, FinancialModel};

    #[test]
    fn validation_rejects_nonpositive_rationals() {
        assert!(matches!(
            FinancialModel::new(Expr::ratio(1, 10), Expr::zero(), Expr::one()),
            Err(FinanceError::NonPositive("volatility"))
        ));
        assert!(matches!(
            FinancialModel::new(Expr::ratio(1, 10), Expr::ratio(2, 5), Expr::int(-1)),
            Err(FinanceError::NonPositive("maturity"))
        ));
        assert!(FinancialModel::new(
            Expr::param("r"),
            Expr::param("sigma"),
            Expr::param("T")
        )
        .is_ok());
    }

    #[test]
    fn correspondence_holds_with_symbolic_constants() {
        let model = FinancialModel::symbolic();
        let c = model.correspondence().unwrap();
        assert!(c.exact, "defect did not vanish");
        assert!(c.cancellation_shown(), "v_s: {} / v: {}", c.v_s_before, c.v_before);
    }

    #[test]
    fn correspondence_holds_for_a_rational_instance() {
        let model = FinancialModel::new(
            Expr::ratio(1, 10),
            Expr::ratio(2, 5),
            Expr::one(),
        )
        .unwrap();
        let c = model.correspondence().unwrap();
        assert!(c.exact);
        assert!(c.cancellation_shown());
    }

    #[test]
    fn chart_changes_round_trip() {
        let model = FinancialModel::symbolic();
        let v = Expr::fun(
            "V",
            &[Expr::var(Var::T), Expr::var(Var::X), Expr::var(Var::Y)],
        );
        let there = model.to_canonical(&v).unwrap();
        let back = model.from_canonical(&there).unwrap();
        assert!(back.sub(&v).is_zero(), "round trip gave {back}");

        let u = Expr::fun(
            "w",
            &[Expr::var(Var::T), Expr::var(Var::X), Expr::var(Var::Y)],
        );
        let out = model.from_canonical(&u).unwrap();
        let again = model.to_canonical(&out).unwrap();
        assert!(again.sub(&u).is_zero(), "round trip gave {again}");
    }

    #[test]
    fn wrong_exponents_leave_a_defect() {
        // With q how it must be but m bent away from r/σ², the V_S
        // coefficient survives.
        let model = FinancialModel::symbolic();
        let c = model.correspondence().unwrap();
        let bent = c
            .v_s_before
            .subst_param("m", &Expr::param("r"))
            .unwrap();
        assert!(!bent.is_zero());
    }
}
