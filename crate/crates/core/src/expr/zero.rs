//! Deciding whether an expression is identically zero.
//!
//! Canonical forms make this structural for the fragment without circular
//! trigonometric atoms: an expression is zero exactly when its numerator is
//! the empty polynomial. Trigonometric identities (sin² + cos² = 1, angle
//! addition, …) are *not* folded by canonicalization, so in their presence
//! the structural test is sound for "zero" but incomplete for "nonzero";
//! a randomized multi-point evaluation then gives a high-confidence verdict
//! instead of a proof.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};

use crate::rng::SplitMix64;

use super::eval::{eval_terms, Env};
use super::{Atom, Expo, Expr, Jet, Poly, Var};

/// Outcome of a zero test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroDecision {
    /// Decided from the canonical form alone; exact in both directions.
    Structural(bool),
    /// Randomized evaluation at `samples` points; `max_rel` is the largest
    /// observed ratio of value to term magnitude. `zero: true` means every
    /// sample cancelled to rounding noise.
    Numeric {
        zero: bool,
        samples: u32,
        max_rel: f64,
    },
    /// Too few sample points landed in the expression's domain.
    Inconclusive { attempts: u32 },
}

impl ZeroDecision {
    /// The affirmative reading: proved zero or numerically indistinguishable
    /// from zero.
    pub fn is_zero(&self) -> bool {
        matches!(
            self,
            ZeroDecision::Structural(true) | ZeroDecision::Numeric { zero: true, .. }
        )
    }
}

const SAMPLES_WANTED: u32 = 12;
const ATTEMPT_BUDGET: u32 = 96;
const REL_TOL: f64 = 1e-9;

impl Expr {
    /// Walks every atom, including those nested inside bases, arguments,
    /// function applications and symbolic exponents.
    pub fn for_each_atom(&self, f: &mut impl FnMut(&Atom)) {
        poly_visit(self.num(), f);
        poly_visit(self.den(), f);
    }

    /// Every jet variable that occurs anywhere in the expression.
    pub fn jets(&self) -> BTreeSet<Jet> {
        let mut out = BTreeSet::new();
        self.for_each_atom(&mut |a| {
            if let Atom::Jet(j) = a {
                out.insert(*j);
            }
        });
        out
    }

    /// Decides whether the expression is identically zero. `seed` fixes the
    /// sample points of the numeric fallback so reports are reproducible.
    pub fn decide_zero(&self, seed: u64) -> ZeroDecision {
        if self.is_zero() {
            return ZeroDecision::Structural(true);
        }
        let mut inv = Inventory::default();
        self.for_each_atom(&mut |a| inv.see(a));
        if !inv.trig {
            return ZeroDecision::Structural(false);
        }

        let mut rng = SplitMix64::new(seed);
        let mut samples = 0u32;
        let mut max_rel = 0.0f64;
        let mut zero = true;
        for attempt in 0..ATTEMPT_BUDGET {
            let env = inv.sample(&mut rng);
            let Ok((nv, nmag)) = eval_terms(self.num(), &env) else {
                continue;
            };
            if !nv.is_finite() || !nmag.is_finite() {
                continue;
            }
            // The denominator only rescales; a nonzero numerator decides.
            let rel = nv.abs() / nmag.max(1.0);
            max_rel = max_rel.max(rel);
            if rel > REL_TOL {
                zero = false;
            }
            samples += 1;
            if samples == SAMPLES_WANTED {
                return ZeroDecision::Numeric {
                    zero,
                    samples,
                    max_rel,
                };
            }
            let _ = attempt;
        }
        if samples >= 4 {
            ZeroDecision::Numeric {
                zero,
                samples,
                max_rel,
            }
        } else {
            ZeroDecision::Inconclusive {
                attempts: ATTEMPT_BUDGET,
            }
        }
    }
}

pub(crate) fn poly_visit(p: &Poly, f: &mut impl FnMut(&Atom)) {
    for m in p.terms.keys() {
        for (a, e) in &m.powers {
            f(a);
            match a {
                Atom::Log(base) | Atom::Pow(base) => poly_visit(base, f),
                Atom::Exp(arg) | Atom::Trig(_, arg) => arg.for_each_atom(f),
                Atom::Fun(app) => {
                    for x in &app.args {
                        x.for_each_atom(f);
                    }
                }
                Atom::Param(_) | Atom::Prime(_) | Atom::Var(_) | Atom::Jet(_) => {}
            }
            if let Expo::Sym(inner) = e {
                inner.for_each_atom(f);
            }
        }
    }
}

#[derive(Default)]
struct Inventory {
    vars: BTreeSet<Var>,
    jets: BTreeSet<Jet>,
    params: BTreeSet<String>,
    trig: bool,
    funs: bool,
}

impl Inventory {
    fn see(&mut self, a: &Atom) {
        match a {
            Atom::Var(v) => {
                self.vars.insert(*v);
            }
            Atom::Jet(j) => {
                self.jets.insert(*j);
            }
            Atom::Param(p) => {
                self.params.insert(p.name().to_string());
            }
            Atom::Trig(..) => self.trig = true,
            Atom::Fun(_) => self.funs = true,
            _ => {}
        }
    }

    /// Variables stay in a log-safe positive band; jets and parameters may
    /// take either sign.
    fn sample(&self, rng: &mut SplitMix64) -> Env {
        let mut env = Env::new();
        for v in &self.vars {
            env = env.var(*v, rng.f64_in(0.55, 1.85));
        }
        for j in &self.jets {
            env = env.jet(*j, rng.f64_in(-1.6, 1.6));
        }
        for p in &self.params {
            env = env.param(p, rng.f64_in(0.3, 2.2));
        }
        env
    }
}
