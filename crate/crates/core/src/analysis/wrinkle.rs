//! Surface relief left by the periodic corrector on a free face.

use crate::error::{Error, Result};
use crate::mesh::HexMesh;
use crate::pcp::{check_mesh, unit_strain_field, CorrectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Top,
    Bottom,
}

impl Surface {
    pub fn label(self) -> &'static str {
        match self {
            Surface::Top => "top",
            Surface::Bottom => "bottom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct WrinkleReport {
    pub surface: Surface,
    /// Largest absolute deviation from the macroscopic surface.
    pub amplitude: f64,
    /// Root mean square of the deviation's in-plane gradient.
    pub slope_rms: f64,
    /// Area of the deviated surface over its projected area.
    pub area_ratio: f64,
    /// Largest difference between a tile and its neighbours, relative to the amplitude.
    pub periodicity_error: f64,
    /// Deviation at the surface nodes, `(n1 + 1) × (n2 + 1)` with `i` fastest.
    pub deviation: Vec<f64>,
}

/// Deviation of the normal displacement of `surface` from the macroscopic
/// shape `ξ₃` plus its best-fitting constant.
///
/// `tiles = (k1, k2)` states how many copies of the base cell the mesh spans;
/// the report measures how far the relief departs from that repetition.
pub fn surface_wrinkle(
    corrector: &CorrectorField,
    mesh: &HexMesh,
    surface: Surface,
    tiles: (usize, usize),
) -> Result<WrinkleReport> {
    check_mesh(corrector, mesh)?;
    let [n1, n2, n3] = mesh.resolution();
    let (k1, k2) = tiles;
    if k1 == 0 || k2 == 0 || n1 % k1 != 0 || n2 % k2 != 0 {
        return Err(Error::Analysis(format!(
            "tile counts {k1}x{k2} do not divide the in-plane resolution {n1}x{n2}"
        )));
    }
    let k = match surface {
        Surface::Top => n3,
        Surface::Bottom => 0,
    };
    let m = corrector.mode.magnitude;
    let xi = unit_strain_field(corrector.mode);
    let raw = |i: usize, j: usize| {
        let node = mesh.node_id(i, j, k);
        corrector.displacement[node][2] - m * xi.eval(mesh.nodes()[node])[2]
    };
    let masters: Vec<f64> = (0..n2).flat_map(|j| (0..n1).map(move |i| (i, j))).map(|(i, j)| raw(i, j)).collect();
    let mean = masters.iter().sum::<f64>() / masters.len() as f64;
    let nx = n1 + 1;
    let deviation: Vec<f64> = (0..=n2)
        .flat_map(|j| (0..=n1).map(move |i| (i, j)))
        .map(|(i, j)| masters[(i % n1) + n1 * (j % n2)] - mean)
        .collect();
    let at = |i: usize, j: usize| deviation[i + nx * j];
    let amplitude = deviation.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // Bilinear interpolation per face, integrated with 2×2 Gauss points.
    let (x, y) = (mesh.grid(0), mesh.grid(1));
    let g = 0.5 / 3f64.sqrt();
    let mut slope2 = 0.0;
    let mut area = 0.0;
    let mut projected = 0.0;
    for j in 0..n2 {
        for i in 0..n1 {
            let (dx, dy) = (x[i + 1] - x[i], y[j + 1] - y[j]);
            let (d00, d10, d01, d11) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
            for s in [0.5 - g, 0.5 + g] {
                for t in [0.5 - g, 0.5 + g] {
                    let gx = ((d10 - d00) * (1.0 - t) + (d11 - d01) * t) / dx;
                    let gy = ((d01 - d00) * (1.0 - s) + (d11 - d10) * s) / dy;
                    let w = 0.25 * dx * dy;
                    let q = gx * gx + gy * gy;
                    slope2 += w * q;
                    area += w * (1.0 + q).sqrt();
                    projected += w;
                }
            }
        }
    }

    let (p1, p2) = (n1 / k1, n2 / k2);
    let mut worst = 0.0f64;
    for j in 0..n2 {
        for i in 0..n1 {
            let here = at(i, j);
            if k1 > 1 {
                worst = worst.max((here - at((i + p1) % n1, j)).abs());
            }
            if k2 > 1 {
                worst = worst.max((here - at(i, (j + p2) % n2)).abs());
            }
        }
    }
    Ok(WrinkleReport {
        surface,
        amplitude,
        slope_rms: (slope2 / projected).sqrt(),
        area_ratio: area / projected,
        periodicity_error: if amplitude > 0.0 { worst / amplitude } else { 0.0 },
        deviation,
    })
}
