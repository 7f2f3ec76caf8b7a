//! Cauchy transforms of measures on the triadic Cantor set, their
//! multivalued primitives, monodromy with exact rational certificates, and a
//! finite sheet-graph model of the resulting surface.
//!
//! The Cantor set is translated to `K = C - 1/2 ⊂ [-1/2, 1/2]` so that the
//! base point `0` sits in the central gap.

pub mod cauchy;
pub mod error;
pub mod geometry;
pub mod green;
pub mod measures;
pub mod monodromy;
pub mod path;
pub mod quadrature;
pub mod rational;
pub mod render;
pub mod riemannium;

pub use error::{Error, Result};
pub use num::complex::Complex64;
pub use rational::Rational;
