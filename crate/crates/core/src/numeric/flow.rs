//! One-parameter flows of infinitesimal generators.
//!
//! The flow of `X = ξ⁰∂t + ξ¹∂x + ξ²∂y + η∂u` through a point is the
//! solution of `d(t,x,y,u)/dε = (ξ⁰, ξ¹, ξ², η)`.  When every component is an
//! affine function of its own coordinate with constant coefficients the flow
//! decouples and is written in closed form; otherwise a fixed-step classical
//! Runge–Kutta integrator is used.  The method actually taken is reported so
//! downstream checks can state what they relied on.
//!
//! Because a symmetry check evaluates flows at every lattice node, the
//! right-hand side is compiled once per generator into flat `f64` terms over
//! the coordinates and `ln x` instead of re-walking the exact expression
//! tree at every stage.  Components that fall outside that shape (symbolic
//! parameters, exotic atoms) fall back to exact-expression evaluation.

use alloc::vec::Vec;

use crate::expr::{Atom, Env, Expo, Expr, Poly, Var};
use crate::field::VectorField;

use super::NumericError;

/// How a flow was evaluated.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FlowMethod {
    /// Every component is `a·(own coordinate) + b` with constant `a`, `b`;
    /// the flow is exact up to rounding.
    ClosedForm,
    /// Classical fourth-order Runge–Kutta with fixed substeps.
    RungeKutta,
}

const VARS: [Var; 4] = [Var::T, Var::X, Var::Y, Var::U];

/// Closed-form per-component data: `d v/dε = a·v + b`.
#[derive(Clone, Copy, Debug)]
struct AffineComponent {
    a: f64,
    b: f64,
}

fn affine_decomposition(field: &VectorField) -> Option<[AffineComponent; 4]> {
    let mut out = [AffineComponent { a: 0.0, b: 0.0 }; 4];
    for (slot, (component, own)) in field.components().iter().zip(VARS).enumerate() {
        for other in VARS {
            if other != own && component.depends_on(other) {
                return None;
            }
        }
        let a = component.diff(own);
        if !(a.is_param_only() && !a.depends_on(own)) {
            return None;
        }
        let b = component.sub(&a.mul(&Expr::var(own)));
        if !b.is_param_only() {
            return None;
        }
        let env = Env::new();
        out[slot] = AffineComponent {
            a: a.eval(&env).ok()?,
            b: b.eval(&env).ok()?,
        };
    }
    Some(out)
}

/// One monomial of a compiled polynomial: coefficient times powers of the
/// slots `(t, x, y, u, ln x)`.
#[derive(Clone, Copy, Debug)]
struct CompiledTerm {
    coeff: f64,
    exps: [i32; 5],
}

#[derive(Clone, Debug, Default)]
struct CompiledPoly {
    terms: Vec<CompiledTerm>,
    uses_log: bool,
}

fn ipow(base: f64, e: i32) -> f64 {
    let mut acc = 1.0;
    let mut b = if e < 0 { 1.0 / base } else { base };
    let mut n = e.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            acc *= b;
        }
        b *= b;
        n >>= 1;
    }
    acc
}

impl CompiledPoly {
    fn compile(p: &Poly) -> Option<CompiledPoly> {
        use num_traits::ToPrimitive;
        let log_x = Poly::atom(Atom::Var(Var::X));
        let mut out = CompiledPoly::default();
        for (m, c) in &p.terms {
            let coeff = c.numer().to_f64()? / c.denom().to_f64()?;
            let mut exps = [0i32; 5];
            for (a, e) in &m.powers {
                let slot = match a {
                    Atom::Var(Var::T) => 0,
                    Atom::Var(Var::X) => 1,
                    Atom::Var(Var::Y) => 2,
                    Atom::Var(Var::U) => 3,
                    Atom::Log(b) if **b == log_x => 4,
                    _ => return None,
                };
                let Expo::Int(k) = e else { return None };
                exps[slot] = (*k).try_into().ok()?;
            }
            out.uses_log |= exps[4] != 0;
            out.terms.push(CompiledTerm { coeff, exps });
        }
        Some(out)
    }

    fn eval(&self, p: [f64; 4], log_x: f64) -> f64 {
        let slots = [p[0], p[1], p[2], p[3], log_x];
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coeff;
            for (s, e) in slots.iter().zip(t.exps) {
                if e != 0 {
                    v *= ipow(*s, e);
                }
            }
            acc += v;
        }
        acc
    }
}

#[derive(Clone, Debug)]
struct CompiledComponent {
    num: CompiledPoly,
    den: Option<CompiledPoly>,
}

impl CompiledComponent {
    fn compile(e: &Expr) -> Option<CompiledComponent> {
        let num = CompiledPoly::compile(e.num())?;
        let den = if e.den().is_one() {
            None
        } else {
            Some(CompiledPoly::compile(e.den())?)
        };
        Some(CompiledComponent { num, den })
    }

    fn uses_log(&self) -> bool {
        self.num.uses_log || self.den.as_ref().is_some_and(|d| d.uses_log)
    }

    fn eval(&self, p: [f64; 4], log_x: f64) -> Result<f64, NumericError> {
        let n = self.num.eval(p, log_x);
        match &self.den {
            None => Ok(n),
            Some(d) => {
                let dv = d.eval(p, log_x);
                if dv == 0.0 {
                    return Err(NumericError::Eval(crate::expr::EvalError::Domain(
                        "division by zero",
                    )));
                }
                Ok(n / dv)
            }
        }
    }
}

/// A generator prepared for repeated numeric transport: the closed-form
/// shortcut when available, a compiled right-hand side when the components
/// are rational in `(t, x, y, u, ln x)`, and the exact expression tree as
/// the last resort.
pub struct Flow<'a> {
    field: &'a VectorField,
    affine: Option<[AffineComponent; 4]>,
    compiled: Option<[CompiledComponent; 4]>,
}

impl<'a> Flow<'a> {
    pub fn new(field: &'a VectorField) -> Flow<'a> {
        let affine = affine_decomposition(field);
        let compiled = if affine.is_some() {
            None
        } else {
            let c = field.components();
            match (
                CompiledComponent::compile(c[0]),
                CompiledComponent::compile(c[1]),
                CompiledComponent::compile(c[2]),
                CompiledComponent::compile(c[3]),
            ) {
                (Some(a), Some(b), Some(c), Some(d)) => Some([a, b, c, d]),
                _ => None,
            }
        };
        Flow {
            field,
            affine,
            compiled,
        }
    }

    pub fn method(&self) -> FlowMethod {
        if self.affine.is_some() {
            FlowMethod::ClosedForm
        } else {
            FlowMethod::RungeKutta
        }
    }

    fn rhs(&self, p: [f64; 4]) -> Result<[f64; 4], NumericError> {
        if let Some(comps) = &self.compiled {
            let needs_log = comps.iter().any(CompiledComponent::uses_log);
            let log_x = if needs_log {
                if p[1] <= 0.0 {
                    return Err(NumericError::Eval(crate::expr::EvalError::Domain(
                        "log of nonpositive value",
                    )));
                }
                libm::log(p[1])
            } else {
                0.0
            };
            return Ok([
                comps[0].eval(p, log_x)?,
                comps[1].eval(p, log_x)?,
                comps[2].eval(p, log_x)?,
                comps[3].eval(p, log_x)?,
            ]);
        }
        let env = Env::new()
            .var(Var::T, p[0])
            .var(Var::X, p[1])
            .var(Var::Y, p[2])
            .var(Var::U, p[3]);
        let c = self.field.components();
        Ok([
            c[0].eval(&env)?,
            c[1].eval(&env)?,
            c[2].eval(&env)?,
            c[3].eval(&env)?,
        ])
    }

    /// Transport a point by `ε` along the flow.
    pub fn map(&self, eps: f64, point: [f64; 4]) -> Result<[f64; 4], NumericError> {
        if let Some(parts) = &self.affine {
            let mut out = point;
            for (v, part) in out.iter_mut().zip(parts) {
                // dv/dε = a·v + b: either a pure translation or an
                // exponential push with the e^{aε}−1 factor kept exact.
                if part.a == 0.0 {
                    *v += part.b * eps;
                } else {
                    let grow = libm::exp(part.a * eps);
                    *v = *v * grow + part.b / part.a * (grow - 1.0);
                }
            }
            return Ok(out);
        }

        // Substeps scale with ε so the integrator error stays far below the
        // discretization budgets this feeds; the count is deterministic.
        let substeps = (libm::ceil(libm::fabs(eps) / 0.0125) as usize).max(8);
        let h = eps / substeps as f64;
        let mut p = point;
        for _ in 0..substeps {
            let k1 = self.rhs(p)?;
            let k2 = self.rhs(advanced(p, k1, h / 2.0))?;
            let k3 = self.rhs(advanced(p, k2, h / 2.0))?;
            let k4 = self.rhs(advanced(p, k3, h))?;
            for s in 0..4 {
                p[s] += h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
            }
        }
        Ok(p)
    }
}

/// Which integration path [`map_point`] takes for this generator.
pub fn flow_method(field: &VectorField) -> FlowMethod {
    Flow::new(field).method()
}

/// One-shot convenience: transport a point by `ε` along the flow of `field`.
///
/// Returns the image point and the method used.  Generators containing free
/// symbolic parameters cannot be evaluated and surface an evaluation error;
/// substitute concrete values first.
pub fn map_point(
    field: &VectorField,
    eps: f64,
    point: [f64; 4],
) -> Result<([f64; 4], FlowMethod), NumericError> {
    let flow = Flow::new(field);
    Ok((flow.map(eps, point)?, flow.method()))
}

fn advanced(p: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [
        p[0] + h * k[0],
        p[1] + h * k[1],
        p[2] + h * k[2],
        p[3] + h * k[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::{flow_method, map_point, Flow, FlowMethod};
    use crate::expr::{Env, Var};
    use crate::field::VectorField;

    #[test]
    fn translations_and_scalings_take_the_closed_form_path() {
        let dt = VectorField::translation(Var::T);
        let (p, method) = map_point(&dt, 0.3, [1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(method, FlowMethod::ClosedForm);
        assert_eq!(p, [1.3, 2.0, 3.0, 4.0]);

        let scale = VectorField::parse("x*Dx + y*Dy").unwrap();
        assert_eq!(flow_method(&scale), FlowMethod::ClosedForm);
        let (q, _) = map_point(&scale, 0.5, [1.0, 2.0, 3.0, 4.0]).unwrap();
        let grow = libm::exp(0.5);
        assert!((q[1] - 2.0 * grow).abs() < 1e-14);
        assert!((q[2] - 3.0 * grow).abs() < 1e-14);
        assert_eq!((q[0], q[3]), (1.0, 4.0));
    }

    #[test]
    fn coupled_components_fall_back_to_runge_kutta_accurately() {
        // X = x·y·Dx + (1/2)y²·Dy flows y(ε) = y₀/(1 − y₀ε/2) exactly, and
        // x satisfies dx/dε = x·y along that trajectory:
        // x(ε) = x₀/(1 − y₀ε/2)².
        let field = VectorField::parse("x*y*Dx + 1/2*y^2*Dy").unwrap();
        assert_eq!(flow_method(&field), FlowMethod::RungeKutta);
        let (x0, y0, eps) = (1.5, 0.8, 0.25);
        let (p, method) = map_point(&field, eps, [0.0, x0, y0, 2.0]).unwrap();
        assert_eq!(method, FlowMethod::RungeKutta);
        let denom = 1.0 - y0 * eps / 2.0;
        assert!((p[2] - y0 / denom).abs() < 1e-10, "y = {}", p[2]);
        assert!((p[1] - x0 / (denom * denom)).abs() < 1e-10, "x = {}", p[1]);
    }

    #[test]
    fn compiled_right_hand_side_matches_exact_evaluation() {
        let field = VectorField::parse(
            "t^2*Dt + (t*ln(x) - 3*y)*x*Dx + 3*t*y*Dy \
             - (ln(x)^2 - 1/2*t*ln(x) + 1/4*t^2 + 2*t + 3/2*y)*u*Du",
        )
        .unwrap();
        let flow = Flow::new(&field);
        assert!(flow.compiled.is_some(), "should compile to flat terms");
        let p = [0.7, 1.9, -0.4, 2.3];
        let fast = flow.rhs(p).unwrap();
        let env = Env::new()
            .var(Var::T, p[0])
            .var(Var::X, p[1])
            .var(Var::Y, p[2])
            .var(Var::U, p[3]);
        for (slot, component) in field.components().iter().enumerate() {
            let exact = component.eval(&env).unwrap();
            assert!(
                (fast[slot] - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
                "slot {slot}: {} vs {exact}",
                fast[slot]
            );
        }
    }

    #[test]
    fn forward_and_backward_flows_invert_each_other() {
        let field = VectorField::parse("t*Dt + 1/2*x*ln(x)*Dx + 3/2*y*Dy + 1/4*(ln(x)-t)*u*Du")
            .unwrap();
        let start = [0.4, 1.3, 0.7, 2.0];
        let (there, _) = map_point(&field, 0.1, start).unwrap();
        let (back, _) = map_point(&field, -0.1, there).unwrap();
        for s in 0..4 {
            assert!((back[s] - start[s]).abs() < 1e-10, "slot {s}");
        }
    }

    #[test]
    fn u_scaling_grows_only_the_fiber() {
        let field = VectorField::u_scaling();
        let (p, method) = map_point(&field, 1.0, [0.1, 0.2, 0.3, 2.0]).unwrap();
        assert_eq!(method, FlowMethod::ClosedForm);
        assert!((p[3] - 2.0 * libm::exp(1.0)).abs() < 1e-14);
        assert_eq!(&p[..3], &[0.1, 0.2, 0.3]);
    }
}
