//! Conforming P1 finite elements for the three Bresse fields.

mod assembly;
mod mesh;
mod state;

pub use assembly::{assemble_forms, element_matrices, AssembledSystem, DofMap, Field, Forms};
pub use mesh::{Mesh, MIN_ELEMENTS};
pub use state::{EnergyComponents, InitialFields, StateVector};
