//! Generalized SQG front dynamics: spectral substrate, symbols, right-hand
//! sides, time stepping, diagnostics and the velocity-field cross-check.

pub mod checkpoint;
pub mod config;
pub mod constants;
pub mod contourfield;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod evolve;
pub mod quadrature;
pub mod rhs;
pub mod special;
pub mod spectral;
pub mod symbols;
pub mod verify;

pub use constants::Params;
pub use error::{Error, Result};
pub use spectral::{FrontState, Grid};
