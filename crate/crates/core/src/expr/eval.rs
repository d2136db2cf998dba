//! Floating-point evaluation against an environment binding variables,
//! jets and parameters. All transcendental calls go through `libm` so the
//! same bits come out on every platform and under `no_std`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use num_traits::ToPrimitive;

use super::{Atom, Expo, Expr, Jet, Poly, Rat, Trig, Var};

/// Bindings for evaluation. Unbound names are reported, not defaulted.
#[derive(Clone, Debug, Default)]
pub struct Env {
    vars: BTreeMap<Var, f64>,
    jets: BTreeMap<Jet, f64>,
    params: BTreeMap<String, f64>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn var(mut self, v: Var, x: f64) -> Env {
        self.vars.insert(v, x);
        self
    }

    pub fn jet(mut self, j: Jet, x: f64) -> Env {
        self.jets.insert(j, x);
        self
    }

    pub fn param(mut self, name: &str, x: f64) -> Env {
        self.params.insert(name.to_string(), x);
        self
    }
}

/// Why a numeric evaluation could not produce a value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    UnboundVar(Var),
    UnboundJet(Jet),
    UnboundParam(String),
    /// Function symbols carry no closed form to evaluate.
    OpaqueFunction(String),
    /// Log of a nonpositive value, fractional power of a negative value,
    /// or division by (numerically) zero.
    Domain(&'static str),
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::UnboundVar(v) => write!(f, "unbound variable {}", v.name()),
            EvalError::UnboundJet(j) => write!(f, "unbound jet variable {:?}", j),
            EvalError::UnboundParam(p) => write!(f, "unbound parameter {p}"),
            EvalError::OpaqueFunction(name) => {
                write!(f, "function symbol {name} has no numeric binding")
            }
            EvalError::Domain(what) => write!(f, "domain error: {what}"),
        }
    }
}

fn rat_f64(r: &Rat) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

impl Expr {
    /// Evaluates to `f64`. Every variable, jet and parameter occurring in
    /// the expression must be bound in `env`.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let num = eval_poly(self.num(), env)?;
        if self.den().is_one() {
            return Ok(num);
        }
        let den = eval_poly(self.den(), env)?;
        if den == 0.0 {
            return Err(EvalError::Domain("division by zero"));
        }
        Ok(num / den)
    }
}

fn eval_poly(p: &Poly, env: &Env) -> Result<f64, EvalError> {
    Ok(eval_terms(p, env)?.0)
}

/// Evaluates a polynomial term by term, returning `(value, magnitude)`
/// where the magnitude is the sum of the absolute term values. The ratio
/// of the two quantifies cancellation, which the randomized zero test
/// uses as its relative scale.
pub(crate) fn eval_terms(p: &Poly, env: &Env) -> Result<(f64, f64), EvalError> {
    let mut acc = 0.0;
    let mut mag = 0.0;
    for (m, c) in &p.terms {
        let mut term = rat_f64(c);
        for (a, e) in &m.powers {
            let base = eval_atom(a, env)?;
            term *= eval_power(base, e, env)?;
        }
        acc += term;
        mag += term.abs();
    }
    Ok((acc, mag))
}

fn eval_atom(a: &Atom, env: &Env) -> Result<f64, EvalError> {
    match a {
        Atom::Param(p) => env
            .params
            .get(p.name())
            .copied()
            .ok_or_else(|| EvalError::UnboundParam(p.name().to_string())),
        Atom::Prime(p) => Ok(*p as f64),
        Atom::Var(v) => env.vars.get(v).copied().ok_or(EvalError::UnboundVar(*v)),
        Atom::Jet(j) => env.jets.get(j).copied().ok_or(EvalError::UnboundJet(*j)),
        Atom::Log(base) => {
            let b = eval_poly(base, env)?;
            if b <= 0.0 {
                return Err(EvalError::Domain("log of nonpositive value"));
            }
            Ok(libm::log(b))
        }
        Atom::Exp(arg) => Ok(libm::exp(arg.eval(env)?)),
        Atom::Pow(base) => eval_poly(base, env),
        Atom::Trig(Trig::Sin, arg) => Ok(libm::sin(arg.eval(env)?)),
        Atom::Trig(Trig::Cos, arg) => Ok(libm::cos(arg.eval(env)?)),
        Atom::Fun(app) => Err(EvalError::OpaqueFunction(app.sym.name().to_string())),
    }
}

fn eval_power(base: f64, e: &Expo, env: &Env) -> Result<f64, EvalError> {
    match e {
        Expo::Int(k) => Ok(libm::pow(base, *k as f64)),
        Expo::Rat(r) => {
            if base < 0.0 {
                return Err(EvalError::Domain("fractional power of negative value"));
            }
            Ok(libm::pow(base, rat_f64(r)))
        }
        Expo::Sym(inner) => {
            let k = inner.eval(env)?;
            if base < 0.0 && k != libm::trunc(k) {
                return Err(EvalError::Domain("fractional power of negative value"));
            }
            Ok(libm::pow(base, k))
        }
    }
}
