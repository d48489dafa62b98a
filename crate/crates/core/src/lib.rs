//! Numerical laboratory for the Bresse beam with one discontinuous local
//! Kelvin–Voigt damping acting on the axial force.
//!
//! The crate discretizes the energy space with P1 finite elements and checks
//! the stability picture of the continuous system on the discrete model:
//! dissipativity of the generator, a spectrum strictly left of the imaginary
//! axis, polynomial growth of the resolvent along the axis and polynomial
//! decay of the energy.

// `!(a < b)` is used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discretization;
pub mod error;
pub mod linalg;
pub mod model;
pub mod resolvent;
pub mod spectral;
pub mod timedomain;

pub use discretization::{AssembledSystem, Mesh, StateVector};
pub use error::{BresseError, Result};
pub use model::{ModelParams, SpeedClass, SpeedVariant};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
