//! Numerical core for sign-changing solutions of the critical equation
//! `ΔV = |V|^{2*-2} V` on ℝⁿ and the blow-up obstructions built from them.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, configuration and the command line
//! live in the `nodal` companion crate.
//!
//! Sign convention throughout: `Δ = -div ∇` (the geometers' Laplacian), so
//! the standard bubble satisfies `ΔB = B^{2*-1}` with `ΔB > 0`.
//!
//! Module map:
//!
//! - [`numerics`]: quadrature, Dormand–Prince integration, bracketed roots and
//!   seeded Monte-Carlo.
//! - [`profile`]: members of Σ (closed-form, sampled radial, latitude pullbacks),
//!   Kelvin transform, `λ(V)`, `α(V)`, integral functionals.
//! - [`ding`]: shooting for `O(p)×O(q+1)`-invariant nodal solutions on `Sⁿ`
//!   and their stereographic pullback.
//! - [`curvature`]: algebraic curvature tensors, Kulkarni–Nomizu products,
//!   product-sphere Weyl tensors.
//! - [`weyl_product`]: the functional `Weyl ⊗ B` by four routes.
//! - [`green_mass`]: mass of the Green's function of `Δ + h₀` on round `S³`.
//! - [`pohozaev`]: flat Pohozaev balance and the 3-D mass boundary functional.
//! - [`obstruction`]: blow-up rate, rule-out logic and the non-blow-up certificate.

#![no_std]
// When std is anywhere in the crate graph its inherent float methods shadow
// the libm trait and the `Real` imports become unused.
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose so that NaN fails the test too; tabulated
// quadrature nodes keep every published digit.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod curvature;
pub mod ding;
pub mod error;
pub mod green_mass;
pub mod math;
pub mod numerics;
pub mod obstruction;
pub mod pohozaev;
pub mod profile;
pub mod weyl_product;

pub use error::{Error, Result};
pub use profile::Profile;
