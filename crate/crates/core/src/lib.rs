//! Numerical machinery for attenuated geodesic ray transforms on simple
//! surfaces, complex geometric optics for perturbed polyharmonic operators on
//! admissible product manifolds, and boundary symbol recursion.

pub mod boundary;
pub mod cgo;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod raytransform;
pub mod recovery;

pub use error::{Error, Result};
