//! Randomized algebraic laws of the public engine surface.
//!
//! Each property is an identity that must hold for *every* input, so the
//! checks are exact (canonical-form equality) except where a law is only
//! meaningful numerically (flow composition), which gets a tight float
//! tolerance.

use asianlie_core::algebra::commutator;
use asianlie_core::expr::{parse, Env, Expr, Var};
use asianlie_core::field::VectorField;
use asianlie_core::numeric::{flow_method, map_point, FlowMethod};
use proptest::prelude::*;

/// Polynomial expressions over `t, x, y`, a parameter, and small rationals —
/// the fragment every engine layer must handle exactly.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-6i64..=6).prop_map(Expr::int),
        ((-6i64..=6), 1i64..=5).prop_map(|(n, d)| Expr::ratio(n, d)),
        Just(Expr::var(Var::T)),
        Just(Expr::var(Var::X)),
        Just(Expr::var(Var::Y)),
        Just(Expr::param("a")),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            inner.prop_map(|a| a.mul(&a)),
        ]
    })
}

fn arb_var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::T), Just(Var::X), Just(Var::Y)]
}

/// Vector fields with polynomial coefficients (plus `u`-linear `eta`).
fn arb_field() -> impl Strategy<Value = VectorField> {
    (arb_expr(), arb_expr(), arb_expr(), arb_expr()).prop_map(|(a, b, c, d)| {
        VectorField::new(a, b, c, d.mul(&Expr::var(Var::U)))
            .expect("polynomial components are jet-free")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn display_round_trips_through_the_parser(e in arb_expr()) {
        let reparsed = parse(&e.to_string()).expect("display stays in the grammar");
        prop_assert!(reparsed.sub(&e).is_zero(), "{e} reparsed as {reparsed}");
    }

    #[test]
    fn ring_laws_hold_in_canonical_form(
        a in arb_expr(),
        b in arb_expr(),
        c in arb_expr(),
    ) {
        prop_assert!(a.add(&b).sub(&b.add(&a)).is_zero());
        prop_assert!(a.mul(&b).sub(&b.mul(&a)).is_zero());
        prop_assert!(a.add(&b).add(&c).sub(&a.add(&b.add(&c))).is_zero());
        prop_assert!(
            a.mul(&b.add(&c)).sub(&a.mul(&b).add(&a.mul(&c))).is_zero(),
            "distributivity failed for a = {a}, b = {b}, c = {c}"
        );
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn differentiation_is_linear_and_leibniz(
        a in arb_expr(),
        b in arb_expr(),
        v in arb_var(),
    ) {
        let sum_rule = a.add(&b).diff(v).sub(&a.diff(v).add(&b.diff(v)));
        prop_assert!(sum_rule.is_zero());
        let leibniz = a
            .mul(&b)
            .diff(v)
            .sub(&a.diff(v).mul(&b).add(&a.mul(&b.diff(v))));
        prop_assert!(leibniz.is_zero(), "Leibniz failed for a = {a}, b = {b}");
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(
        a in arb_expr(),
        b in arb_expr(),
        t in -2.0f64..2.0,
        x in 0.25f64..2.0,
        y in -2.0f64..2.0,
    ) {
        let env = Env::new()
            .var(Var::T, t)
            .var(Var::X, x)
            .var(Var::Y, y)
            .param("a", 0.6250720977717015);
        let (ea, eb) = (a.eval(&env).unwrap(), b.eval(&env).unwrap());
        let sum = a.add(&b).eval(&env).unwrap();
        let prod = a.mul(&b).eval(&env).unwrap();
        let scale = 1.0 + ea.abs().max(eb.abs()).max(sum.abs()).max(prod.abs());
        prop_assert!((sum - (ea + eb)).abs() <= 1e-9 * scale);
        prop_assert!((prod - ea * eb).abs() <= 1e-7 * scale);
    }

    #[test]
    fn substitution_commutes_with_arithmetic(
        a in arb_expr(),
        b in arb_expr(),
        r in arb_expr(),
    ) {
        let lhs = a.mul(&b).subst_var(Var::X, &r).unwrap();
        let rhs = a
            .subst_var(Var::X, &r)
            .unwrap()
            .mul(&b.subst_var(Var::X, &r).unwrap());
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn commutators_are_antisymmetric_and_satisfy_jacobi(
        x in arb_field(),
        y in arb_field(),
        z in arb_field(),
    ) {
        let xy = commutator(&x, &y).unwrap();
        let yx = commutator(&y, &x).unwrap();
        prop_assert!(xy.add(&yx).is_zero(), "antisymmetry failed");

        let cyc1 = commutator(&x, &commutator(&y, &z).unwrap()).unwrap();
        let cyc2 = commutator(&y, &commutator(&z, &x).unwrap()).unwrap();
        let cyc3 = commutator(&z, &commutator(&x, &y).unwrap()).unwrap();
        prop_assert!(
            cyc1.add(&cyc2).add(&cyc3).is_zero(),
            "Jacobi failed for x = {x}, y = {y}, z = {z}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_flows_compose_additively(
        coeffs in proptest::array::uniform8(-3i64..=3),
        eps1 in -0.4f64..0.4,
        eps2 in -0.4f64..0.4,
    ) {
        // Components affine in their own coordinate flow in closed form;
        // the flow is a one-parameter group: Φ_{ε1} ∘ Φ_{ε2} = Φ_{ε1+ε2}.
        let comp = |k: usize, v: Var| {
            Expr::int(coeffs[2 * k])
                .mul(&Expr::var(v))
                .add(&Expr::int(coeffs[2 * k + 1]))
        };
        let field = VectorField::new(
            comp(0, Var::T),
            comp(1, Var::X),
            comp(2, Var::Y),
            comp(3, Var::U),
        )
        .unwrap();
        prop_assume!(matches!(flow_method(&field), FlowMethod::ClosedForm));

        let p = [0.3, 1.2, -0.7, 0.9];
        let (mid, _) = map_point(&field, eps2, p).unwrap();
        let (two_step, _) = map_point(&field, eps1, mid).unwrap();
        let (one_step, _) = map_point(&field, eps1 + eps2, p).unwrap();
        for k in 0..4 {
            let scale = 1.0 + one_step[k].abs();
            prop_assert!(
                (two_step[k] - one_step[k]).abs() <= 1e-9 * scale,
                "component {k}: {two_step:?} vs {one_step:?}"
            );
        }
    }
}
