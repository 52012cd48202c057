//! Three-layer representative plates and zone-by-zone stress comparison.

use crate::cell::CellSpec;
use crate::error::{Error, Result};
use crate::homogenization::{superpose, StressField};
use crate::mesh::HexMesh;
use crate::mode::Order;

use super::profile::slab_matrix_values;
use super::relative_l2;

/// Which face of the original plate the representative reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Top skin, one core layer, bottom skin.
    Symmetric,
    /// The three layers below the top face.
    Top,
    /// The three layers above the bottom face.
    Bottom,
}

impl Alignment {
    pub fn label(self) -> &'static str {
        match self {
            Alignment::Symmetric => "symmetric",
            Alignment::Top => "top",
            Alignment::Bottom => "bottom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub spec: CellSpec,
    pub alignment: Alignment,
    /// Original structural layer (1-based from the top) copied into each layer.
    pub source_layers: [usize; 3],
    /// `y_original − y_representative` at each layer's centre.
    pub layer_offsets: [f64; 3],
    /// Structural pitch shared by both plates.
    pub pitch: f64,
}

impl Representative {
    /// Rigid `y₃` shift from the representative frame to the original one
    /// along the aligned face; zero for the symmetric construction.
    pub fn frame_offset(&self) -> f64 {
        match self.alignment {
            Alignment::Symmetric => 0.0,
            Alignment::Top => self.layer_offsets[0],
            Alignment::Bottom => self.layer_offsets[2],
        }
    }

    /// Stress of the representative under the original plate's curvature:
    /// the bending field expressed about the original midplane.
    pub fn aligned_bending(&self, bending: &StressField, membrane: &StressField) -> Result<StressField> {
        let (mb, mm) = match (bending.mode, membrane.mode) {
            (Some(b), Some(m)) if b.order == Order::Bending && m.order == Order::Membrane && b.pair == m.pair => {
                (b.magnitude, m.magnitude)
            }
            _ => {
                return Err(Error::Analysis(
                    "aligned bending needs a bending field and the membrane field of the same pair".into(),
                ))
            }
        };
        if mm == 0.0 {
            return Err(Error::ZeroMagnitude);
        }
        let mut out = superpose(&[(1.0, bending), (self.frame_offset() * mb / mm, membrane)])?;
        out.mode = bending.mode;
        Ok(out)
    }
}

/// Builds the three-layer plate for `alignment`, keeping covers, inclusion
/// geometry and layer spacing of `spec`.
pub fn build_representative(spec: &CellSpec, alignment: Alignment) -> Result<Representative> {
    if !spec.plies.is_empty() {
        return Err(Error::Analysis("representative plates need a single background material".into()));
    }
    let layers = spec.structural_layers();
    let n = layers.len();
    if n < 3 {
        return Err(Error::Analysis(format!("need at least 3 structural layers, found {n}")));
    }
    let pitch = spec
        .structural_pitch()
        .ok_or_else(|| Error::Analysis("structural layers are not equally spaced".into()))?;
    let source_layers = match alignment {
        Alignment::Symmetric => [1, 2, n],
        Alignment::Top => [1, 2, 3],
        Alignment::Bottom => [n - 2, n - 1, n],
    };
    let h = spec.half_thickness;
    let (first, last) = (&layers[0], &layers[n - 1]);
    let cover_top = h - (first.center_y3 + first.radius);
    let cover_bottom = last.center_y3 - last.radius + h;
    let src = source_layers.map(|k| &layers[k - 1]);
    let d12 = layers[source_layers[0] - 1].center_y3 - layers[source_layers[0]].center_y3;
    let d23 = layers[source_layers[2] - 2].center_y3 - layers[source_layers[2] - 1].center_y3;
    let thickness = cover_top + src[0].radius + d12 + d23 + src[2].radius + cover_bottom;
    let hr = 0.5 * thickness;
    let c1 = hr - cover_top - src[0].radius;
    let centers = [c1, c1 - d12, c1 - d12 - d23];

    let mut out = CellSpec::homogeneous(spec.h1, spec.h2, thickness, &spec.matrix_material);
    for (layer, &c) in src.iter().zip(&centers) {
        for &m in &layer.members {
            let mut inc = spec.inclusions[m].clone();
            inc.center_y3 = c;
            out.inclusions.push(inc);
        }
    }
    out.validate()?;
    let layer_offsets = [0, 1, 2].map(|k| src[k].center_y3 - centers[k]);
    Ok(Representative {
        spec: out,
        alignment,
        source_layers,
        layer_offsets,
        pitch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Informative,
    NonInformative,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Informative => "informative",
            Verdict::NonInformative => "non-informative",
        }
    }
}

/// Distance between the matrix von Mises fields of two zones.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Similarity {
    pub rel_l2: f64,
    pub rel_max: f64,
    /// Number of element pairs that are matrix in both zones.
    pub compared: usize,
    pub verdict: Verdict,
}

/// Element layers of `mesh` that exactly tile `zone`.
fn zone_layers(mesh: &HexMesh, zone: (f64, f64)) -> Result<Vec<usize>> {
    let tol = 1e-9 * mesh.spec().half_thickness.max(1.0);
    let n3 = mesh.resolution()[2];
    let ks: Vec<usize> = (0..n3)
        .filter(|&k| {
            let (b, t) = mesh.layer_bounds(k);
            b >= zone.0 - tol && t <= zone.1 + tol
        })
        .collect();
    let covers = match (ks.first(), ks.last()) {
        (Some(&a), Some(&b)) => {
            (mesh.layer_bounds(a).0 - zone.0).abs() <= tol && (mesh.layer_bounds(b).1 - zone.1).abs() <= tol
        }
        _ => false,
    };
    if !covers {
        return Err(Error::IncongruentZones(format!(
            "zone [{}, {}] does not fall on element layer boundaries",
            zone.0, zone.1
        )));
    }
    Ok(ks)
}

/// Compares zone `zone_a` of one solution with `zone_b` of another, slab by
/// slab after aligning the zone bottoms. Both meshes must share the in-plane
/// grid and the element layering of the zones.
pub fn compare_sss(
    field_a: &StressField,
    mesh_a: &HexMesh,
    zone_a: (f64, f64),
    field_b: &StressField,
    mesh_b: &HexMesh,
    zone_b: (f64, f64),
    threshold: f64,
) -> Result<Similarity> {
    if !(threshold > 0.0) {
        return Err(Error::Analysis(format!("threshold must be positive, got {threshold}")));
    }
    for (f, m) in [(field_a, mesh_a), (field_b, mesh_b)] {
        if f.len() != m.n_elements() {
            return Err(Error::MeshMismatch(format!("{} stresses for {} elements", f.len(), m.n_elements())));
        }
    }
    let [a1, a2, _] = mesh_a.resolution();
    let [b1, b2, _] = mesh_b.resolution();
    if (a1, a2) != (b1, b2) {
        return Err(Error::IncongruentZones(format!("in-plane grids {a1}x{a2} and {b1}x{b2} differ")));
    }
    let ka = zone_layers(mesh_a, zone_a)?;
    let kb = zone_layers(mesh_b, zone_b)?;
    if ka.len() != kb.len() {
        return Err(Error::IncongruentZones(format!("{} and {} element layers", ka.len(), kb.len())));
    }
    for (&i, &j) in ka.iter().zip(&kb) {
        let (ba, ta) = mesh_a.layer_bounds(i);
        let (bb, tb) = mesh_b.layer_bounds(j);
        let (da, db) = (ta - ba, tb - bb);
        if (da - db).abs() > 1e-6 * da.max(db) || ((ba - zone_a.0) - (bb - zone_b.0)).abs() > 1e-6 * da.max(db) {
            return Err(Error::IncongruentZones("element layers do not line up".into()));
        }
    }
    let mut xa = Vec::new();
    let mut xb = Vec::new();
    for (&i, &j) in ka.iter().zip(&kb) {
        for (p, q) in slab_matrix_values(field_a, mesh_a, i).into_iter().zip(slab_matrix_values(field_b, mesh_b, j)) {
            if let (Some(p), Some(q)) = (p, q) {
                xa.push(p);
                xb.push(q);
            }
        }
    }
    let rel_l2 = relative_l2(&xa, &xb);
    let (ma, mb) = (xa.iter().fold(0.0f64, |m, &v| m.max(v)), xb.iter().fold(0.0f64, |m, &v| m.max(v)));
    let rel_max = if ma.max(mb) == 0.0 { 0.0 } else { (ma - mb).abs() / ma.max(mb) };
    Ok(Similarity {
        rel_l2,
        rel_max,
        compared: xa.len(),
        verdict: if rel_l2 <= threshold {
            Verdict::Informative
        } else {
            Verdict::NonInformative
        },
    })
}

/// One representative layer against its counterpart in the original plate.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ZoneComparison {
    /// Layer of the representative, 1-based from the top.
    pub layer: usize,
    /// Original layer it was compared with.
    pub source_layer: usize,
    pub representative_zone: (f64, f64),
    pub original_zone: (f64, f64),
    pub similarity: Similarity,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimilarityReport {
    pub alignment: Alignment,
    pub threshold: f64,
    pub zones: Vec<ZoneComparison>,
}

/// Interior layer of `spec` with the same geometry as `layer`, nearest the midplane.
fn core_partner(spec: &CellSpec, layer: usize) -> usize {
    let layers = spec.structural_layers();
    let sig = spec.signature(&layers[layer - 1]);
    (2..layers.len())
        .filter(|&k| spec.signature(&layers[k - 1]) == sig)
        .min_by(|&a, &b| layers[a - 1].center_y3.abs().total_cmp(&layers[b - 1].center_y3.abs()).then(a.cmp(&b)))
        .unwrap_or(layer)
}

/// Compares every layer of a representative with the original plate.
///
/// Each representative layer zone is compared with the same interval shifted
/// into the original frame. The core layer of a symmetric representative is
/// compared with the original interior layer of the same geometry nearest the
/// midplane.
pub fn compare_representative(
    original: &StressField,
    original_mesh: &HexMesh,
    rep: &Representative,
    rep_field: &StressField,
    rep_mesh: &HexMesh,
    threshold: f64,
) -> Result<SimilarityReport> {
    let zone = |spec: &CellSpec, k: usize| {
        spec.layer_zone(k)
            .ok_or_else(|| Error::Analysis(format!("structural layer {k} does not exist")))
    };
    let spec = original_mesh.spec();
    let mut pairs = Vec::with_capacity(3);
    for k in 1..=3 {
        let rz = zone(rep_mesh.spec(), k)?;
        let (source, oz) = match rep.alignment {
            Alignment::Top | Alignment::Bottom => {
                let off = rep.frame_offset();
                (rep.source_layers[k - 1], (rz.0 + off, rz.1 + off))
            }
            Alignment::Symmetric => {
                let source = if k == 2 { core_partner(spec, rep.source_layers[1]) } else { rep.source_layers[k - 1] };
                (source, zone(spec, source)?)
            }
        };
        pairs.push((source, rz, oz));
    }
    let zones = pairs
        .iter()
        .enumerate()
        .map(|(i, &(source_layer, rz, oz))| {
            let similarity = compare_sss(rep_field, rep_mesh, rz, original, original_mesh, oz, threshold)?;
            Ok(ZoneComparison {
                layer: i + 1,
                source_layer,
                representative_zone: rz,
                original_zone: oz,
                similarity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityReport {
        alignment: rep.alignment,
        threshold,
        zones,
    })
}

pub fn classify_informative(report: &SimilarityReport) -> Vec<Verdict> {
    report.zones.iter().map(|z| z.similarity.verdict).collect()
}

/// Verdicts expected for each representative layer (top first), where known.
pub fn expected_pattern(alignment: Alignment, order: Order) -> Option<[Verdict; 3]> {
    use Verdict::*;
    match (alignment, order) {
        (_, Order::Membrane) => Some([Informative; 3]),
        (Alignment::Top, Order::Bending) => Some([Informative, Informative, NonInformative]),
        (Alignment::Bottom, Order::Bending) => Some([NonInformative, Informative, Informative]),
        (Alignment::Symmetric, Order::Bending) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::tests::nine_layer;
    use crate::cell::{Axis, LayeredPlate};
    use crate::homogenization::Stress;
    use crate::mesh::generate_mesh_spaced;

    fn ten_layer() -> CellSpec {
        LayeredPlate { layers: 10, ..nine_layer() }.build().unwrap()
    }

    #[test]
    fn representatives_keep_cover_and_spacing() {
        let spec = ten_layer();
        for alignment in [Alignment::Symmetric, Alignment::Top, Alignment::Bottom] {
            let rep = build_representative(&spec, alignment).unwrap();
            assert!((rep.spec.thickness() - 3.1).abs() < 1e-12);
            let layers = rep.spec.structural_layers();
            assert_eq!(layers.len(), 3);
            assert!((rep.spec.half_thickness - layers[0].center_y3 - 0.55).abs() < 1e-12);
            assert!((rep.spec.structural_pitch().unwrap() - 1.0).abs() < 1e-12);
        }
        let top = build_representative(&spec, Alignment::Top).unwrap();
        assert_eq!(top.source_layers, [1, 2, 3]);
        assert!((top.frame_offset() - 3.5).abs() < 1e-12);
        let axes: Vec<Axis> = top.spec.inclusions.iter().map(|i| i.axis).collect();
        assert_eq!(axes, vec![Axis::Y2, Axis::Y1, Axis::Y2]);
        let bottom = build_representative(&spec, Alignment::Bottom).unwrap();
        assert_eq!(bottom.source_layers, [8, 9, 10]);
        assert!((bottom.frame_offset() + 3.5).abs() < 1e-12);
        let axes: Vec<Axis> = bottom.spec.inclusions.iter().map(|i| i.axis).collect();
        assert_eq!(axes, vec![Axis::Y1, Axis::Y2, Axis::Y1]);
    }

    #[test]
    fn core_partner_is_nearest_the_midplane() {
        assert_eq!(core_partner(&nine_layer().build().unwrap(), 2), 4);
        assert_eq!(core_partner(&ten_layer(), 2), 6);
    }

    #[test]
    fn too_thin_plate_is_rejected() {
        let spec = LayeredPlate { layers: 2, ..nine_layer() }.build().unwrap();
        assert!(build_representative(&spec, Alignment::Top).is_err());
    }

    fn field_from(mesh: &HexMesh, f: impl Fn([f64; 3]) -> f64) -> StressField {
        StressField {
            mode: None,
            elements: (0..mesh.n_elements())
                .map(|e| Some(Stress([f(mesh.element_centroid(e)), 0.0, 0.0, 0.0, 0.0, 0.0])))
                .collect(),
        }
    }

    #[test]
    fn shifted_copies_compare_equal() {
        let spec = ten_layer();
        let rep = build_representative(&spec, Alignment::Top).unwrap();
        let m0 = generate_mesh_spaced(&spec, 4, 6, 0.25).unwrap();
        let m1 = generate_mesh_spaced(&rep.spec, 4, 6, 0.25).unwrap();
        let off = rep.frame_offset();
        let g = |y: [f64; 3]| 1.0 + y[0] + 0.3 * y[1] * y[2];
        let f0 = field_from(&m0, g);
        let f1 = field_from(&m1, |y| g([y[0], y[1], y[2] + off]));
        let report = compare_representative(&f0, &m0, &rep, &f1, &m1, 0.05).unwrap();
        for z in &report.zones {
            assert!(z.similarity.rel_l2 < 1e-12, "{z:?}");
            assert!(z.similarity.compared > 0);
        }
        // A bottom-anchored comparison sees a different part of the field.
        let bottom = build_representative(&spec, Alignment::Bottom).unwrap();
        let m2 = generate_mesh_spaced(&bottom.spec, 4, 6, 0.25).unwrap();
        let report = compare_representative(&f0, &m0, &bottom, &f1, &m2, 0.05).unwrap();
        assert!(classify_informative(&report).contains(&Verdict::NonInformative));
    }

    #[test]
    fn misaligned_zones_are_rejected() {
        let spec = ten_layer();
        let m = generate_mesh_spaced(&spec, 4, 4, 0.25).unwrap();
        let f = field_from(&m, |_| 1.0);
        let err = compare_sss(&f, &m, (0.0, 0.33), &f, &m, (1.0, 1.33), 0.05).unwrap_err();
        assert!(matches!(err, Error::IncongruentZones(_)));
        let coarse = generate_mesh_spaced(&spec, 4, 4, 0.5).unwrap();
        let g = field_from(&coarse, |_| 1.0);
        assert!(compare_sss(&f, &m, (2.55, 3.55), &g, &coarse, (2.55, 3.55), 0.05).is_err());
    }

    #[test]
    fn expected_patterns() {
        use Verdict::*;
        assert_eq!(expected_pattern(Alignment::Top, Order::Bending), Some([Informative, Informative, NonInformative]));
        assert_eq!(expected_pattern(Alignment::Bottom, Order::Bending), Some([NonInformative, Informative, Informative]));
        assert_eq!(expected_pattern(Alignment::Symmetric, Order::Membrane), Some([Informative; 3]));
    }
}
