//! Exact symbolic engine and verification toolkit for the pricing equation
//! `u_t = x^2*u_xx + f(x)*u_y` on the half-line `x > 0`.
//!
//! The crate is organized in layers:
//!
//! * [`expr`] — canonical rational-symbolic expressions over the independent
//!   variables, jet variables, named parameters, logarithms, exponentials and
//!   opaque function symbols, with exact rational arithmetic throughout.
//! * [`field`] — vector fields on `(t, x, y, u)`-space, their second
//!   prolongation and the symmetry residual for the pricing equation.
//! * [`determining`] — the determining system produced by jet-monomial
//!   splitting and its reduction/equivalence machinery.
//! * [`transform`] — the admissible equivalence transformations of the
//!   equation class and full change-of-variables verification.
//! * [`family`] — closed-form drift families, the classifying ODE, and
//!   canonicalization to the normal forms `x`, `ln^n x`, `ln ln x`.
//! * [`cases`] — symmetry ansätze for the classified cases and the versioned
//!   generator catalog.
//! * [`algebra`] — commutators, span decomposition and closure reports.
//! * [`finance`] — the change of variables connecting the market-coordinate
//!   pricing PDE to the canonical equation.
//! * [`numeric`] — finite-difference solver, manufactured-solution checks,
//!   one-parameter group flows and numerical symmetry verification.
//! * [`reduce`] — invariant-ansatz reductions for supported generators.
//!
//! The default `std` feature only gates conveniences; all symbolic and
//! numeric kernels are `no_std + alloc` compatible (float math through
//! `libm`, so results are identical across environments).

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod cases;
pub mod determining;
pub mod expr;
pub mod family;
pub mod finance;
pub mod field;
pub mod numeric;
pub mod reduce;
pub mod rng;
pub mod transform;

/// Engine version reported by downstream tools; bumped on any change that
/// can alter canonical forms, report layout or numeric defaults.
pub const ENGINE_VERSION: &str = "0.1.0";

/// Version of the expression text grammar accepted by [`expr::parse`].
pub const GRAMMAR_VERSION: u32 = 1;
