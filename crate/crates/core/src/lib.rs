//! Numerical certificates for a Gibbons–Hawking type family of 4-manifolds
//! fibred over the round three-sphere.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! * [`s3core`]: round `S³` geometry, pole layout, symmetry actions, sampling
//!   and quadrature on geodesic spheres.
//! * [`harmonic`]: the balanced Green's function and the potential `u`.
//! * [`metric`]: the profile `V`, the circle-bundle metric data and its Ricci
//!   curvature in four algebraically independent layers.
//! * [`curvature`]: a brute-force coordinate curvature engine driven by
//!   second-order jets, used as an oracle for the closed forms.
//! * [`global_verify`]: Chern integrals, conformal closeness, curve lengths and
//!   graph-based diameter estimates.
//! * [`heisenberg`]: finite Heisenberg groups and their nilmanifold actions.
//! * [`perturbation`]: conformal smoothing at the fixed points and the
//!   frame-bundle positivity criterion.
//!
//! IO, reports and the command line live in the `ricciforge` crate.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod curvature;
mod error;
pub mod global_verify;
pub mod harmonic;
pub mod heisenberg;
pub mod linalg;
pub mod metric;
pub mod perturbation;
pub mod quadrature;
pub mod s3core;
pub mod scalar;

pub use error::{Error, Result};
