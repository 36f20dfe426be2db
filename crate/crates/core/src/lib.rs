//! Pseudospectral geometry on the flat torus: compatible metrics, the
//! symplectic form on their space, the action of volume-preserving
//! diffeomorphisms, and the canonical-bundle momentum map.

pub mod diffeo;
pub mod error;
pub mod grid;
pub mod momentum;
pub mod quadrature;
pub mod riemannian;
pub mod sample;
pub mod symplectic;
pub mod tensor;

pub use error::{GeomError, Result};
pub use grid::{Grid, ScalarField};
pub use riemannian::{Metric, VolumeForm};
pub use symplectic::TangentVector;
