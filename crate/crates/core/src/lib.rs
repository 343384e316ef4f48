//! Classical motion in the plane through convex bumps carrying constant
//! magnetic fields.
//!
//! Particles move at unit speed on straight lines outside the bumps and on
//! Larmor circles of radius `1/|b|` inside. The crate provides exact
//! event-driven propagation, the linearized (Jacobi) flow and Poincare map
//! derivatives, the single-bump scattering degree, a cone-field
//! hyperbolicity check and orbit finding from symbol sequences.

pub mod conefield;
pub mod error;
pub mod export;
pub mod flow;
pub mod geometry;
pub mod linearization;
pub mod math;
pub mod scattering;
pub mod symbolic;

pub use error::{Error, Result};
pub use geometry::{Bump, Scene};
pub use math::{Mat2, Vec2};
