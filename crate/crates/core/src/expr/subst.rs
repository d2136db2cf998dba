//! Substitution: a single rewrite engine walks every atom (including those
//! nested in bases, arguments and symbolic exponents) and rebuilds the
//! expression through the smart constructors, so results are canonical by
//! construction.

use super::{Atom, Expo, Expr, ExprError, FunApp, Jet, Poly, Trig, Var};

impl Expr {
    /// Replaces every atom the rule matches by the rule's value (raised to
    /// the atom's exponent). Unmatched atoms are rebuilt with their nested
    /// contents rewritten. Errors surface when a substitution lands outside
    /// the representable domain (zero denominators, logs of nonpositive
    /// constants, non-parameter exponents).
    pub fn rewrite(&self, rule: &impl Fn(&Atom) -> Option<Expr>) -> Result<Expr, ExprError> {
        let num = poly_rewrite(self.num(), rule)?;
        if self.den().is_one() {
            return Ok(num);
        }
        let den = poly_rewrite(self.den(), rule)?;
        num.div(&den)
    }

    /// Substitutes an expression for an independent variable.
    pub fn subst_var(&self, v: Var, r: &Expr) -> Result<Expr, ExprError> {
        self.rewrite(&|a: &Atom| match a {
            Atom::Var(w) if *w == v => Some(r.clone()),
            _ => None,
        })
    }

    /// Substitutes an expression for a jet variable.
    pub fn subst_jet(&self, j: Jet, r: &Expr) -> Result<Expr, ExprError> {
        self.rewrite(&|a: &Atom| match a {
            Atom::Jet(jj) if *jj == j => Some(r.clone()),
            _ => None,
        })
    }

    /// Substitutes an expression for a named parameter (also inside
    /// symbolic exponents; the exponent must stay parameter-only).
    pub fn subst_param(&self, name: &str, r: &Expr) -> Result<Expr, ExprError> {
        self.rewrite(&|a: &Atom| match a {
            Atom::Param(p) if p.name() == name => Some(r.clone()),
            _ => None,
        })
    }

    /// Rewrites function-symbol applications. The rule sees the full
    /// application (symbol, derivative tag, arguments with any inner
    /// substitutions not yet applied) and may return a replacement.
    pub fn subst_fun(
        &self,
        rule: &impl Fn(&FunApp) -> Option<Expr>,
    ) -> Result<Expr, ExprError> {
        self.rewrite(&|a: &Atom| match a {
            Atom::Fun(app) => rule(app),
            _ => None,
        })
    }
}

fn poly_rewrite(
    p: &Poly,
    rule: &impl Fn(&Atom) -> Option<Expr>,
) -> Result<Expr, ExprError> {
    let mut out = Expr::zero();
    for (m, c) in &p.terms {
        let mut term = Expr::rational(c.clone());
        for (a, e) in &m.powers {
            let e = expo_rewrite(e, rule)?;
            let image = match rule(a) {
                Some(r) => r,
                None => rebuild_atom(a, rule)?,
            };
            term = term.mul(&image.pow_expo(&e)?);
        }
        out = out.add(&term);
    }
    Ok(out)
}

fn expo_rewrite(
    e: &Expo,
    rule: &impl Fn(&Atom) -> Option<Expr>,
) -> Result<Expo, ExprError> {
    match e {
        Expo::Int(_) | Expo::Rat(_) => Ok(e.clone()),
        Expo::Sym(inner) => {
            let r = inner.rewrite(rule)?;
            Expo::from_expr(&r).ok_or(ExprError::ExponentNotParameter)
        }
    }
}

/// Image of an unmatched atom: children rewritten, then rebuilt through the
/// matching smart constructor. For `Pow` and `Prime` the image is the base;
/// the caller applies the exponent.
fn rebuild_atom(a: &Atom, rule: &impl Fn(&Atom) -> Option<Expr>) -> Result<Expr, ExprError> {
    Ok(match a {
        Atom::Param(_) | Atom::Var(_) | Atom::Jet(_) => Expr::from_atom(a.clone()),
        Atom::Prime(p) => Expr::int(*p as i64),
        Atom::Log(base) => poly_rewrite(base, rule)?.ln()?,
        Atom::Exp(arg) => arg.rewrite(rule)?.exp(),
        Atom::Pow(base) => poly_rewrite(base, rule)?,
        Atom::Trig(Trig::Sin, arg) => arg.rewrite(rule)?.sin(),
        Atom::Trig(Trig::Cos, arg) => arg.rewrite(rule)?.cos(),
        Atom::Fun(app) => {
            let mut args = alloc::vec::Vec::with_capacity(app.args.len());
            for x in &app.args {
                args.push(x.rewrite(rule)?);
            }
            Expr::from_atom(Atom::Fun(alloc::boxed::Box::new(FunApp {
                sym: app.sym.clone(),
                deriv: app.deriv.clone(),
                args,
            })))
        }
    })
}
