//! Quaternionic reduction of the stationary Schrödinger equation
//! `(-Δ + u) f = 0` to Vekua equations, with the Bers pseudoanalytic
//! function machinery needed to generate new solutions from a known one.
//!
//! Wirtinger derivatives follow the convention `∂z = ∂x - i∂y`,
//! `∂z̄ = ∂x + i∂y` (no factor 1/2), and the plane is identified with
//! space through `z = x + iy`, `x = x2`, `y = x1`.

pub mod bers;
pub mod cquat;
pub mod curve;
pub mod domain;
pub mod error;
pub mod exprfield;
pub mod field;
pub mod jet;
pub mod quad;
pub mod quatcalc;
pub mod schrod;

pub use error::{Error, Result};

/// A point `(x, y)` of the plane.
pub type Point2 = [f64; 2];
/// A point `(x1, x2, x3)` of space.
pub type Point3 = [f64; 3];
