//! Box-decomposition resolutions of monomial ideals in the Bergman space.

pub mod complex;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod ideal;
pub mod lattice;
pub mod linalg;
pub mod toeplitz;

pub use error::{Error, Result};
pub mod cli;
