//! Periodicity-cell problems on hexahedral meshes.

pub mod affine;
pub mod corrector;
pub mod element;
pub mod multigrid;
pub mod sparse;
pub mod system;

pub use affine::{unit_strain_field, AffineField};
pub(crate) use corrector::check_mesh;
pub use corrector::{reconstruct_displacement, recover_n};
pub use system::{solve_pcp, CellSystem, ElementCache, CorrectorField, MaterialTable, SolveReport, SolverOptions};

#[cfg(test)]
mod tests;
