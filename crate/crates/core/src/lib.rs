//! Killing magnetic curves in the two non-flat Lorentzian-Heisenberg spaces.
//!
//! A curve γ is a magnetic trajectory of a Killing field V when its tangent
//! satisfies ∇_t t = V ∧ t. This crate provides, for the metrics g₁ and g₂
//! on the Heisenberg group H₃:
//!
//! - [`geometry`]: orthonormal frames, metric tensors, the Levi-Civita
//!   connection tables, the signature-adapted cross product and the
//!   four-dimensional Killing algebra, with a finite-difference Killing check;
//! - [`dynamics`]: the magnetic equation as a first-order coordinate ODE,
//!   fixed-step RK4 and embedded RK45 integrators, conserved quantities;
//! - [`closedform`]: the analytic solution families, both exactly as printed
//!   in the source text and in derivation-consistent form, plus the reduced
//!   scalar equations and reconstruction by quadrature;
//! - [`elliptic`]: Jacobi elliptic functions, the complete elliptic integral,
//!   and quartic-energy solving of the reduced equations at c = 0;
//! - [`verify`]: residual and conservation checks that referee whether any
//!   curve, analytic or numeric, satisfies its governing system.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the `*64` aliases below fix the common `f64` choice.

// Validation uses negated comparisons like `!(x > 0)` so that NaN inputs are
// rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod geometry;
mod numeric;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParams64 = geometry::ModelParams<f64>;
pub type CoordPoint64 = geometry::CoordPoint<f64>;
pub type CoordVelocity64 = geometry::CoordVelocity<f64>;
pub type FrameVector64 = geometry::FrameVector<f64>;
pub type CurveState64 = dynamics::CurveState<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type IntegratorConfig64 = dynamics::IntegratorConfig<f64>;
pub type FamilySpec64 = closedform::FamilySpec<f64>;
pub type ReducedEquation64 = closedform::ReducedEquation<f64>;
pub type ResidualReport64 = verify::ResidualReport<f64>;
