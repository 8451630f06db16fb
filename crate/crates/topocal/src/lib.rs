//! Calibration orbits of differential forms: the deformation complexes E^k,
//! the metrical/elliptic/topological predicates, operator identities on flat
//! tori, and the power-series deformation solver with Fourier-exact arithmetic.

pub mod deform;
pub mod error;
pub mod exalg;
pub mod hodge;
pub mod linalg;
pub mod orbits;
pub mod scalar;
pub mod torus;

pub use error::{Error, Result};
