//! Through-thickness stress profiles and boundary-layer detection.

use crate::cell::CellSpec;
use crate::error::{Error, Result};
use crate::homogenization::StressField;
use crate::mesh::HexMesh;

use super::relative_l2;

/// Von Mises statistics of one element slab.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabStats {
    pub bottom: f64,
    pub top: f64,
    pub matrix_mean: f64,
    pub matrix_max: f64,
    pub inclusion_mean: f64,
    pub inclusion_max: f64,
    /// Relative departure from the slab one repeat pitch towards the midplane;
    /// zero when there is no such slab.
    pub deviation: f64,
}

impl SlabStats {
    pub fn center(&self) -> f64 {
        0.5 * (self.bottom + self.top)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerProfile {
    /// One entry per element layer, bottom first.
    pub slabs: Vec<SlabStats>,
    pub half_thickness: f64,
    /// Pitch used to pair slabs, if any.
    pub pitch: Option<f64>,
}

fn mean_max(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    (v.iter().sum::<f64>() / v.len() as f64, v.iter().cloned().fold(0.0, f64::max))
}

/// Matrix-phase von Mises values of element layer `k`, `None` where the element is not matrix.
pub(crate) fn slab_matrix_values(field: &StressField, mesh: &HexMesh, k: usize) -> Vec<Option<f64>> {
    let [n1, n2, _] = mesh.resolution();
    let base = k * n1 * n2;
    (base..base + n1 * n2)
        .map(|e| match (mesh.phase(e).is_matrix(), field.elements[e]) {
            (true, Some(s)) => Some(s.von_mises()),
            _ => None,
        })
        .collect()
}

/// Deviation of two slabs: both mean-normalised over the positions where both
/// are matrix, then compared in a relative L2 norm.
fn slab_deviation(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    let (xa, xb): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter_map(|(p, q)| Some(((*p)?, (*q)?)))
        .unzip();
    if xa.is_empty() {
        return 0.0;
    }
    let normalise = |v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        if m > 0.0 {
            v.into_iter().map(|x| x / m).collect()
        } else {
            v
        }
    };
    relative_l2(&normalise(xa), &normalise(xb))
}

/// Per-slab statistics of a stress field. Each slab is compared with the slab
/// one `pitch` closer to the midplane (default: the cell's repeat pitch).
pub fn layer_profile(field: &StressField, mesh: &HexMesh, pitch: Option<f64>) -> Result<LayerProfile> {
    if field.len() != mesh.n_elements() {
        return Err(Error::MeshMismatch(format!(
            "stress field has {} elements, mesh has {}",
            field.len(),
            mesh.n_elements()
        )));
    }
    if let Some(p) = pitch {
        if !(p > 0.0) {
            return Err(Error::Analysis(format!("pitch must be positive, got {p}")));
        }
    }
    let pitch = pitch.or_else(|| mesh.spec().repeat_pitch());
    let [n1, n2, n3] = mesh.resolution();
    let values: Vec<Vec<Option<f64>>> = (0..n3).map(|k| slab_matrix_values(field, mesh, k)).collect();
    let bounds: Vec<(f64, f64)> = (0..n3).map(|k| mesh.layer_bounds(k)).collect();

    let partner = |k: usize, p: f64| -> Option<usize> {
        let (b, t) = bounds[k];
        let c = 0.5 * (b + t);
        let target = if c >= 0.0 { c - p } else { c + p };
        let (j, dist) = bounds
            .iter()
            .enumerate()
            .map(|(j, &(b, t))| (j, (0.5 * (b + t) - target).abs()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        (dist <= 0.25 * (t - b)).then_some(j)
    };

    let slabs = (0..n3)
        .map(|k| {
            let base = k * n1 * n2;
            let mut incl = Vec::new();
            for e in base..base + n1 * n2 {
                if let (Some(s), false) = (field.elements[e], mesh.phase(e).is_matrix()) {
                    incl.push(s.von_mises());
                }
            }
            let mat: Vec<f64> = values[k].iter().flatten().copied().collect();
            let (matrix_mean, matrix_max) = mean_max(&mat);
            let (inclusion_mean, inclusion_max) = mean_max(&incl);
            let deviation = pitch
                .and_then(|p| partner(k, p))
                .map(|j| slab_deviation(&values[k], &values[j]))
                .unwrap_or(0.0);
            SlabStats {
                bottom: bounds[k].0,
                top: bounds[k].1,
                matrix_mean,
                matrix_max,
                inclusion_mean,
                inclusion_max,
                deviation,
            }
        })
        .collect();
    Ok(LayerProfile {
        slabs,
        half_thickness: mesh.spec().half_thickness,
        pitch,
    })
}

/// Depth of the disturbed zone below each free face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLayer {
    pub top: f64,
    pub bottom: f64,
    pub pitch: Option<f64>,
    pub threshold: f64,
}

impl BoundaryLayer {
    /// Whether both layers are thinner than `s`.
    pub fn within(&self, s: f64) -> bool {
        self.top < s && self.bottom < s
    }
}

/// Distance from each face to the far side of the deepest slab in that half
/// whose deviation exceeds `threshold`; zero when none does.
pub fn boundary_layer_thickness(profile: &LayerProfile, threshold: f64) -> Result<BoundaryLayer> {
    if !(threshold > 0.0) {
        return Err(Error::Analysis(format!("threshold must be positive, got {threshold}")));
    }
    let h = profile.half_thickness;
    let mut top = 0.0f64;
    let mut bottom = 0.0f64;
    for s in profile.slabs.iter().filter(|s| s.deviation > threshold) {
        if s.center() >= 0.0 {
            top = top.max(h - s.bottom);
        } else {
            bottom = bottom.max(s.top + h);
        }
    }
    Ok(BoundaryLayer {
        top,
        bottom,
        pitch: profile.pitch,
        threshold,
    })
}

/// Split of a plate into two skins and a core along structural layers.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinCoreDecomposition {
    /// `(bottom, top)` intervals.
    pub top_skin: (f64, f64),
    pub core: (f64, f64),
    pub bottom_skin: (f64, f64),
    pub top_layers: usize,
    pub core_layers: usize,
    pub bottom_layers: usize,
    pub boundary_layer: BoundaryLayer,
}

/// Rounds each measured boundary layer up to whole structural layers (at
/// least one per skin); the rest is the core.
pub fn skin_core_decompose(
    profile: &LayerProfile,
    spec: &CellSpec,
    threshold: f64,
) -> Result<SkinCoreDecomposition> {
    let n = spec.structural_layers().len();
    if n < 3 {
        return Err(Error::Analysis(format!(
            "a skin-core split needs at least 3 structural layers, found {n}"
        )));
    }
    let bl = boundary_layer_thickness(profile, threshold)?;
    let h = spec.half_thickness;
    let tol = 1e-9 * h.max(1.0);
    let zone = |k: usize| spec.layer_zone(k).expect("layer index in range");
    let mut top_layers = 1;
    while top_layers < n && zone(top_layers).0 > h - bl.top + tol {
        top_layers += 1;
    }
    let mut bottom_layers = 1;
    while bottom_layers < n && zone(n + 1 - bottom_layers).1 < -h + bl.bottom - tol {
        bottom_layers += 1;
    }
    if top_layers + bottom_layers >= n {
        return Err(Error::Analysis(format!(
            "boundary layers ({:.4} top, {:.4} bottom) leave no core",
            bl.top, bl.bottom
        )));
    }
    let top_skin = (zone(top_layers).0, h);
    let bottom_skin = (-h, zone(n + 1 - bottom_layers).1);
    Ok(SkinCoreDecomposition {
        top_skin,
        core: (bottom_skin.1, top_skin.0),
        bottom_skin,
        top_layers,
        core_layers: n - top_layers - bottom_layers,
        bottom_layers,
        boundary_layer: bl,
    })
}
