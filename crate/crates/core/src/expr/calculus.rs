//! Partial and total derivatives.
//!
//! `differentiate` treats jet variables as independent coordinates (the
//! partial derivative of the jet space). `total_derivative` is the total
//! derivative operator `D_v = d/dv + sum_J u_{J+v} d/du_J + u_v d/du` on
//! expressions over jet space; it raises jet order and errors past the
//! supported maximum, naming the offending jet.

use alloc::collections::BTreeSet;

use super::{atom_pow, Atom, Expo, Expr, ExprError, FunApp, Jet, Poly, Trig, Var};
use super::MAX_JET_ORDER;

/// Differentiation symbol: an independent variable or a jet variable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiffVar {
    Var(Var),
    Jet(Jet),
}

impl Expr {
    /// Partial derivative with respect to a variable or jet variable.
    /// Parameters, other jets and opaque symbols are held fixed; the chain
    /// rule is applied through `ln`, `exp`, `sin`, `cos`, opaque powers and
    /// function-symbol arguments.
    pub fn differentiate(&self, v: DiffVar) -> Expr {
        let num = self.num();
        let den = self.den();
        let dn = poly_diff(num, v);
        if den.is_one() {
            return dn;
        }
        let dd = poly_diff(den, v);
        let den_e = Expr::from_poly(den.clone());
        let num_e = Expr::from_poly(num.clone());
        // (n'd - nd')/d^2
        let lhs = dn.mul(&den_e);
        let rhs = num_e.mul(&dd);
        lhs.sub(&rhs)
            .div(&den_e.mul(&den_e))
            .expect("nonzero denominator")
    }

    /// Shorthand for a partial derivative in an independent variable.
    pub fn diff(&self, v: Var) -> Expr {
        self.differentiate(DiffVar::Var(v))
    }

    /// Total derivative `D_v` over jet space. `v` must be `t`, `x` or `y`.
    /// Fails with the offending jet if a derivative beyond the supported
    /// order would be created.
    pub fn total_derivative(&self, v: Var) -> Result<Expr, ExprError> {
        if v == Var::U {
            return Err(ExprError::BadDiffVar);
        }
        // Gather the jets present so only productive terms are formed.
        let mut jets: BTreeSet<Jet> = BTreeSet::new();
        let mut has_u = false;
        self.visit_atoms(&mut |a| {
            match a {
                Atom::Jet(j) => {
                    jets.insert(*j);
                }
                Atom::Var(Var::U) => has_u = true,
                _ => {}
            }
            false
        });
        let mut out = self.diff(v);
        if has_u {
            let uv = Jet::default().bump(v).expect("first-order jet");
            out = out.add(&Expr::jet(uv).mul(&self.diff(Var::U)));
        }
        for j in jets {
            let dj = self.differentiate(DiffVar::Jet(j));
            if dj.is_zero() {
                continue;
            }
            let up = j.bump(v).expect("bump by independent variable");
            if up.order() > MAX_JET_ORDER {
                return Err(ExprError::JetOrder(up));
            }
            out = out.add(&Expr::jet(up).mul(&dj));
        }
        Ok(out)
    }
}

fn poly_diff(p: &Poly, v: DiffVar) -> Expr {
    let mut total = Expr::zero();
    for (m, c) in &p.terms {
        for (a, e) in &m.powers {
            let da = atom_diff(a, v);
            if da.is_zero() {
                continue;
            }
            let mut rest = m.clone();
            rest.powers.remove(a);
            let rest_e = Expr::from_poly(Poly::monomial(rest, c.clone()));
            let term = rest_e
                .mul(&e.to_expr())
                .mul(&atom_pow(a, &e.sub(&Expo::ONE)))
                .mul(&da);
            total = total.add(&term);
        }
    }
    total
}

/// Derivative of a single atom viewed as a function of `v` (the monomial
/// rule `d(a^e) = e a^(e-1) da` is applied by the caller).
fn atom_diff(a: &Atom, v: DiffVar) -> Expr {
    match a {
        Atom::Param(_) | Atom::Prime(_) => Expr::zero(),
        Atom::Var(w) => match v {
            DiffVar::Var(vv) if *w == vv => Expr::one(),
            _ => Expr::zero(),
        },
        Atom::Jet(j) => match v {
            DiffVar::Jet(jj) if *j == jj => Expr::one(),
            _ => Expr::zero(),
        },
        Atom::Log(p) => {
            let dp = poly_diff(p, v);
            if dp.is_zero() {
                return Expr::zero();
            }
            dp.div(&Expr::from_poly((**p).clone()))
                .expect("log bases are nonzero")
        }
        Atom::Exp(arg) => {
            let da = arg.differentiate(v);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::from_atom(a.clone()).mul(&da)
        }
        // The base polynomial's derivative; combined with e*P^(e-1) by the
        // caller this yields d(P^e) = e P^(e-1) P'.
        Atom::Pow(p) => poly_diff(p, v),
        Atom::Trig(Trig::Sin, arg) => arg.cos().mul(&arg.differentiate(v)),
        Atom::Trig(Trig::Cos, arg) => arg.sin().neg().mul(&arg.differentiate(v)),
        Atom::Fun(app) => {
            let mut out = Expr::zero();
            for i in 0..app.args.len() {
                let da = app.args[i].differentiate(v);
                if da.is_zero() {
                    continue;
                }
                let mut deriv = app.deriv.clone();
                deriv[i] += 1;
                let bumped = Expr::from_atom(Atom::Fun(alloc::boxed::Box::new(FunApp {
                    sym: app.sym.clone(),
                    deriv,
                    args: app.args.clone(),
                })));
                out = out.add(&bumped.mul(&da));
            }
            out
        }
    }
}
