//! Post-processing of cell-problem solutions.

use super::affine::unit_strain_field;
use super::system::CorrectorField;
use crate::error::{Error, Result};
use crate::mesh::HexMesh;
use crate::mode::ModeKey;

/// The periodic corrector `N = Z/m − ξ` at every mesh node.
pub fn recover_n(field: &CorrectorField, mesh: &HexMesh) -> Result<Vec<[f64; 3]>> {
    check_mesh(field, mesh)?;
    let m = field.mode.magnitude;
    if m == 0.0 {
        return Err(Error::ZeroMagnitude);
    }
    let xi = unit_strain_field(field.mode);
    Ok(mesh
        .nodes()
        .iter()
        .zip(&field.displacement)
        .map(|(&y, z)| {
            let x = xi.eval(y);
            [z[0] / m - x[0], z[1] / m - x[1], z[2] / m - x[2]]
        })
        .collect())
}

pub(crate) fn check_mesh(field: &CorrectorField, mesh: &HexMesh) -> Result<()> {
    if field.displacement.len() != mesh.n_nodes() {
        return Err(Error::MeshMismatch(format!(
            "field has {} nodes, mesh has {}",
            field.displacement.len(),
            mesh.n_nodes()
        )));
    }
    Ok(())
}

/// First-order fluctuation `ε Σ m_k N^{k}` of a macroscopic state.
///
/// `state` lists the macroscopic strain and curvature values per mode.
pub fn reconstruct_displacement(
    state: &[(ModeKey, f64)],
    correctors: &[CorrectorField],
    mesh: &HexMesh,
    epsilon: f64,
) -> Result<Vec<[f64; 3]>> {
    let mut out = vec![[0.0; 3]; mesh.n_nodes()];
    for &(key, value) in state {
        let field = correctors
            .iter()
            .find(|c| c.mode.key() == key)
            .ok_or_else(|| Error::MissingMode(key.to_string()))?;
        let n = recover_n(field, mesh)?;
        for (o, v) in out.iter_mut().zip(&n) {
            for c in 0..3 {
                o[c] += epsilon * value * v[c];
            }
        }
    }
    Ok(out)
}
