//! Geometry of a periodicity cell `[0, h₁] × [0, h₂] × [−h, h]`.
//!
//! A cell is a matrix (optionally split into homogeneous plies through the
//! thickness) with cylindrical inclusions running parallel to `y₁` or `y₂`.
//! Inclusions are either fibers of another material or empty channels.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Y1,
    Y2,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::Y1 => 0,
            Axis::Y2 => 1,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::Y1 => Axis::Y2,
            Axis::Y2 => Axis::Y1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InclusionKind {
    Fiber,
    Channel,
}

/// A cylinder of circular cross-section running along `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionLayer {
    pub kind: InclusionKind,
    pub axis: Axis,
    pub center_y3: f64,
    pub radius: f64,
    /// Fiber material; `None` for channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    /// Position of the cylinder axis along the transverse in-plane direction.
    pub in_plane_offset: f64,
    /// `(start, length)` along the cylinder axis; `None` runs through the whole period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(f64, f64)>,
}

impl InclusionLayer {
    pub fn fiber(axis: Axis, center_y3: f64, radius: f64, in_plane_offset: f64, material: &str) -> Self {
        Self {
            kind: InclusionKind::Fiber,
            axis,
            center_y3,
            radius,
            material: Some(material.to_string()),
            in_plane_offset,
            span: None,
        }
    }

    pub fn channel(axis: Axis, center_y3: f64, radius: f64, in_plane_offset: f64) -> Self {
        Self {
            kind: InclusionKind::Channel,
            axis,
            center_y3,
            radius,
            material: None,
            in_plane_offset,
            span: None,
        }
    }

    pub fn y3_range(&self) -> (f64, f64) {
        (self.center_y3 - self.radius, self.center_y3 + self.radius)
    }
}

/// A homogeneous through-thickness ply of the background material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ply {
    pub thickness: f64,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub h1: f64,
    pub h2: f64,
    pub half_thickness: f64,
    pub matrix_material: String,
    /// Background plies from bottom to top. Empty means matrix everywhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plies: Vec<Ply>,
    #[serde(default)]
    pub inclusions: Vec<InclusionLayer>,
}

/// One reason a [`CellSpec`] is invalid.
#[derive(Debug, Clone, PartialEq)]
pub enum CellViolation {
    NonPositiveDimension(&'static str),
    NonPositiveRadius { index: usize },
    SurfaceBreach { index: usize },
    Overlap { first: usize, second: usize },
    SelfOverlap { index: usize },
    FiberWithoutMaterial { index: usize },
    BadSpan { index: usize },
    PlyThickness,
    VolumeFraction(f64),
}

impl fmt::Display for CellViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellViolation::NonPositiveDimension(what) => write!(f, "non-positive dimension `{what}`"),
            CellViolation::NonPositiveRadius { index } => write!(f, "inclusion {index}: non-positive radius"),
            CellViolation::SurfaceBreach { index } => write!(f, "inclusion {index}: surface breach"),
            CellViolation::Overlap { first, second } => {
                write!(f, "inclusions {first} and {second}: overlap")
            }
            CellViolation::SelfOverlap { index } => {
                write!(f, "inclusion {index}: overlaps its own periodic image")
            }
            CellViolation::FiberWithoutMaterial { index } => {
                write!(f, "inclusion {index}: fiber without material")
            }
            CellViolation::BadSpan { index } => write!(f, "inclusion {index}: invalid span"),
            CellViolation::PlyThickness => write!(f, "ply thicknesses do not add up to the cell thickness"),
            CellViolation::VolumeFraction(v) => write!(f, "inclusion volume fraction {v:.4} is not below 1"),
        }
    }
}

/// What occupies a point of the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupant<'a> {
    Background(&'a str),
    Inclusion { index: usize, material: Option<&'a str> },
}

/// Wraps `x` into `[-p/2, p/2)`.
fn wrap_centered(x: f64, p: f64) -> f64 {
    x - p * (x / p + 0.5).floor()
}

impl CellSpec {
    pub fn homogeneous(h1: f64, h2: f64, thickness: f64, material: &str) -> Self {
        Self {
            h1,
            h2,
            half_thickness: thickness / 2.0,
            matrix_material: material.to_string(),
            plies: Vec::new(),
            inclusions: Vec::new(),
        }
    }

    /// Stack of homogeneous plies listed from bottom to top.
    pub fn laminate(h1: f64, h2: f64, plies: Vec<Ply>) -> Self {
        let thickness: f64 = plies.iter().map(|p| p.thickness).sum();
        let matrix = plies.first().map(|p| p.material.clone()).unwrap_or_default();
        Self {
            h1,
            h2,
            half_thickness: thickness / 2.0,
            matrix_material: matrix,
            plies,
            inclusions: Vec::new(),
        }
    }

    pub fn thickness(&self) -> f64 {
        2.0 * self.half_thickness
    }

    pub fn period(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Y1 => self.h1,
            Axis::Y2 => self.h2,
        }
    }

    pub fn volume(&self) -> f64 {
        self.h1 * self.h2 * self.thickness()
    }

    /// Interfaces between plies, bottom to top, excluding the free faces.
    pub fn ply_interfaces(&self) -> Vec<f64> {
        let mut z = -self.half_thickness;
        let mut out = Vec::new();
        for p in self.plies.iter().take(self.plies.len().saturating_sub(1)) {
            z += p.thickness;
            out.push(z);
        }
        out
    }

    pub fn background_at(&self, y3: f64) -> &str {
        if self.plies.is_empty() {
            return &self.matrix_material;
        }
        let mut top = -self.half_thickness;
        for p in &self.plies {
            top += p.thickness;
            if y3 < top {
                return &p.material;
            }
        }
        &self.plies.last().unwrap().material
    }

    /// Whether `y` lies inside inclusion `inc`, honoring in-plane periodicity.
    pub fn inclusion_contains(&self, inc: &InclusionLayer, y: [f64; 3]) -> bool {
        let along = inc.axis.index();
        let across = inc.axis.other().index();
        let p_across = self.period(inc.axis.other());
        let d = wrap_centered(y[across] - inc.in_plane_offset, p_across);
        let dz = y[2] - inc.center_y3;
        if d * d + dz * dz >= inc.radius * inc.radius {
            return false;
        }
        match inc.span {
            None => true,
            Some((start, len)) => {
                let p_along = self.period(inc.axis);
                let s = (y[along] - start).rem_euclid(p_along);
                s < len
            }
        }
    }

    /// Distance from `y` to the axis of `inc` within its cross-section.
    pub fn radial_distance(&self, inc: &InclusionLayer, y: [f64; 3]) -> f64 {
        let across = inc.axis.other().index();
        let d = wrap_centered(y[across] - inc.in_plane_offset, self.period(inc.axis.other()));
        d.hypot(y[2] - inc.center_y3)
    }

    /// Unit vector from the axis of `inc` towards `y`, within the cross-section.
    pub fn radial_direction(&self, inc: &InclusionLayer, y: [f64; 3]) -> Option<[f64; 3]> {
        let across = inc.axis.other().index();
        let d = wrap_centered(y[across] - inc.in_plane_offset, self.period(inc.axis.other()));
        let dz = y[2] - inc.center_y3;
        let r = d.hypot(dz);
        (r > 0.0).then(|| {
            let mut n = [0.0; 3];
            n[across] = d / r;
            n[2] = dz / r;
            n
        })
    }

    pub fn occupant(&self, y: [f64; 3]) -> Occupant<'_> {
        for (index, inc) in self.inclusions.iter().enumerate() {
            if self.inclusion_contains(inc, y) {
                return Occupant::Inclusion {
                    index,
                    material: inc.material.as_deref(),
                };
            }
        }
        Occupant::Background(self.background_at(y[2]))
    }

    fn span_length(&self, inc: &InclusionLayer) -> f64 {
        inc.span.map(|s| s.1).unwrap_or_else(|| self.period(inc.axis))
    }

    /// Analytic inclusion volume fraction.
    pub fn inclusion_volume_fraction(&self) -> f64 {
        let v: f64 = self
            .inclusions
            .iter()
            .map(|i| PI * i.radius * i.radius * self.span_length(i))
            .sum();
        v / self.volume()
    }

    /// All violated invariants, in a stable order.
    pub fn violations(&self) -> Vec<CellViolation> {
        let mut out = Vec::new();
        for (name, v) in [("h1", self.h1), ("h2", self.h2), ("half_thickness", self.half_thickness)] {
            if !(v > 0.0) || !v.is_finite() {
                out.push(CellViolation::NonPositiveDimension(name));
            }
        }
        if !out.is_empty() {
            return out;
        }
        if !self.plies.is_empty() {
            let t: f64 = self.plies.iter().map(|p| p.thickness).sum();
            if self.plies.iter().any(|p| !(p.thickness > 0.0))
                || (t - self.thickness()).abs() > GEOM_TOL * self.thickness()
            {
                out.push(CellViolation::PlyThickness);
            }
        }
        for (index, inc) in self.inclusions.iter().enumerate() {
            if !(inc.radius > 0.0) {
                out.push(CellViolation::NonPositiveRadius { index });
                continue;
            }
            if inc.center_y3.abs() + inc.radius >= self.half_thickness - GEOM_TOL * self.half_thickness {
                out.push(CellViolation::SurfaceBreach { index });
            }
            if 2.0 * inc.radius > self.period(inc.axis.other()) + GEOM_TOL {
                out.push(CellViolation::SelfOverlap { index });
            }
            if inc.kind == InclusionKind::Fiber && inc.material.is_none() {
                out.push(CellViolation::FiberWithoutMaterial { index });
            }
            if let Some((_, len)) = inc.span {
                if !(len > 0.0) || len > self.period(inc.axis) + GEOM_TOL {
                    out.push(CellViolation::BadSpan { index });
                }
            }
        }
        for a in 0..self.inclusions.len() {
            for b in a + 1..self.inclusions.len() {
                if self.overlapping(&self.inclusions[a], &self.inclusions[b]) {
                    out.push(CellViolation::Overlap { first: a, second: b });
                }
            }
        }
        let vf = self.inclusion_volume_fraction();
        if vf >= 1.0 {
            out.push(CellViolation::VolumeFraction(vf));
        }
        out
    }

    fn overlapping(&self, a: &InclusionLayer, b: &InclusionLayer) -> bool {
        let reach = a.radius + b.radius - GEOM_TOL;
        let dz = a.center_y3 - b.center_y3;
        if a.axis != b.axis {
            // Orthogonal full-length cylinders cross whenever their heights overlap.
            return dz.abs() < reach;
        }
        if let (Some(sa), Some(sb)) = (a.span, b.span) {
            let p = self.period(a.axis);
            let disjoint = |s: (f64, f64), t: (f64, f64)| {
                let off = (t.0 - s.0).rem_euclid(p);
                off >= s.1 - GEOM_TOL && off + t.1 <= p + GEOM_TOL
            };
            if disjoint(sa, sb) {
                return false;
            }
        }
        let p = self.period(a.axis.other());
        let d = wrap_centered(a.in_plane_offset - b.in_plane_offset, p);
        (d * d + dz * dz).sqrt() < reach
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidCell(v))
        }
    }

    /// Material ids referenced by the cell (background first, then fibers), deduplicated.
    pub fn material_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        let mut push = |s: &str| {
            if !ids.iter().any(|x| x == s) {
                ids.push(s.to_string());
            }
        };
        if self.plies.is_empty() {
            push(&self.matrix_material);
        }
        for p in &self.plies {
            push(&p.material);
        }
        for inc in &self.inclusions {
            if let Some(m) = &inc.material {
                push(m);
            }
        }
        ids
    }

    /// Through-thickness coordinates the mesh must resolve exactly:
    /// free faces, ply interfaces and inclusion extremal planes.
    pub fn y3_breakpoints(&self) -> Vec<f64> {
        let mut z = vec![-self.half_thickness, self.half_thickness];
        z.extend(self.ply_interfaces());
        for inc in &self.inclusions {
            let (lo, hi) = inc.y3_range();
            z.push(lo);
            z.push(hi);
        }
        z.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = self.half_thickness;
        z.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
        z
    }

    /// Groups inclusions sharing a centre height into structural layers, top first.
    pub fn structural_layers(&self) -> Vec<StructuralLayer> {
        let mut centers: Vec<f64> = self.inclusions.iter().map(|i| i.center_y3).collect();
        centers.sort_by(|a, b| b.partial_cmp(a).unwrap());
        centers.dedup_by(|a, b| (*a - *b).abs() <= GEOM_TOL * self.half_thickness.max(1.0));
        centers
            .into_iter()
            .map(|c| {
                let members: Vec<usize> = self
                    .inclusions
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| (i.center_y3 - c).abs() <= GEOM_TOL * self.half_thickness.max(1.0))
                    .map(|(k, _)| k)
                    .collect();
                let radius = members
                    .iter()
                    .map(|&k| self.inclusions[k].radius)
                    .fold(0.0, f64::max);
                StructuralLayer {
                    center_y3: c,
                    radius,
                    members,
                }
            })
            .collect()
    }

    /// Through-thickness spacing of the inclusion layers, if it is uniform.
    pub fn structural_pitch(&self) -> Option<f64> {
        let layers = self.structural_layers();
        if layers.len() < 2 {
            return None;
        }
        let s = layers[0].center_y3 - layers[1].center_y3;
        let uniform = layers
            .windows(2)
            .all(|w| ((w[0].center_y3 - w[1].center_y3) - s).abs() <= 1e-9 * s.max(1.0));
        uniform.then_some(s)
    }

    /// Smallest multiple of the structural pitch after which the layer pattern repeats.
    pub fn repeat_pitch(&self) -> Option<f64> {
        let s = self.structural_pitch()?;
        let layers = self.structural_layers();
        let n = layers.len();
        let sig: Vec<LayerSignature> = layers.iter().map(|l| self.signature(l)).collect();
        (1..n)
            .find(|&m| (0..n - m).all(|k| sig[k] == sig[k + m]))
            .map(|m| m as f64 * s)
    }

    /// Geometric identity of a structural layer, independent of its height.
    pub fn signature(&self, layer: &StructuralLayer) -> LayerSignature {
        let mut parts: Vec<SignatureEntry> = layer
            .members
            .iter()
            .map(|&k| {
                let i = &self.inclusions[k];
                let p = self.period(i.axis.other());
                let q = |x: f64| (x * 1e9).round() as i64;
                SignatureEntry {
                    kind: i.kind,
                    axis: i.axis,
                    radius: q(i.radius),
                    offset: q(i.in_plane_offset.rem_euclid(p)),
                    material: i.material.clone(),
                    span: i.span.map(|(s, l)| (q(s.rem_euclid(self.period(i.axis))), q(l))),
                }
            })
            .collect();
        parts.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        LayerSignature(parts)
    }

    /// `y₃` interval of structural layer `k` (1-based from the top).
    ///
    /// Layer 1 includes the top cover, layer N the bottom cover; every other
    /// layer owns the matrix gap above its inclusions, so the zones partition
    /// `[−h, h]`.
    pub fn layer_zone(&self, k: usize) -> Option<(f64, f64)> {
        let layers = self.structural_layers();
        let n = layers.len();
        if k == 0 || k > n {
            return None;
        }
        let top = if k == 1 {
            self.half_thickness
        } else {
            let l = &layers[k - 2];
            l.center_y3 - l.radius
        };
        let bottom = if k == n {
            -self.half_thickness
        } else {
            let l = &layers[k - 1];
            l.center_y3 - l.radius
        };
        Some((bottom, top))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralLayer {
    pub center_y3: f64,
    pub radius: f64,
    /// Indices into [`CellSpec::inclusions`].
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSignature(Vec<SignatureEntry>);

#[derive(Debug, Clone, PartialEq, Eq)]
struct SignatureEntry {
    kind: InclusionKind,
    axis: Axis,
    radius: i64,
    offset: i64,
    material: Option<String>,
    span: Option<(i64, i64)>,
}

/// Repeats the cell `k1 × k2` times in-plane.
pub fn tile_cell(spec: &CellSpec, k1: usize, k2: usize) -> Result<CellSpec> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidMesh("tile counts must be at least 1".into()));
    }
    let mut out = spec.clone();
    out.h1 = spec.h1 * k1 as f64;
    out.h2 = spec.h2 * k2 as f64;
    out.inclusions.clear();
    for inc in &spec.inclusions {
        for a in 0..k1 {
            for b in 0..k2 {
                let (along_copy, across_copy) = match inc.axis {
                    Axis::Y1 => (a, b),
                    Axis::Y2 => (b, a),
                };
                let (k_along, p_along) = match inc.axis {
                    Axis::Y1 => (k1, spec.h1),
                    Axis::Y2 => (k2, spec.h2),
                };
                let p_across = spec.period(inc.axis.other());
                let mut c = inc.clone();
                c.in_plane_offset = inc.in_plane_offset + across_copy as f64 * p_across;
                if k_along > 1 {
                    let (start, len) = inc.span.unwrap_or((0.0, p_along));
                    c.span = Some((start + along_copy as f64 * p_along, len));
                }
                out.inclusions.push(c);
            }
        }
    }
    out.validate()?;
    Ok(out)
}

/// Parameters of a plate made of equally spaced inclusion layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredPlate {
    pub h1: f64,
    pub h2: f64,
    pub layers: usize,
    pub radius: f64,
    /// Matrix gap between adjacent inclusion layers.
    pub gap: f64,
    /// Matrix cover above the top and below the bottom inclusion layer.
    pub cover: f64,
    pub kind: InclusionKind,
    /// Direction of each layer from the top; defaults to alternating y₂, y₁
    /// for fibers and y₁ throughout for channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<Axis>>,
    pub matrix_material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion_material: Option<String>,
}

impl LayeredPlate {
    pub fn pitch(&self) -> f64 {
        2.0 * self.radius + self.gap
    }

    pub fn thickness(&self) -> f64 {
        2.0 * self.cover + self.layers as f64 * 2.0 * self.radius + self.layers.saturating_sub(1) as f64 * self.gap
    }

    pub fn directions(&self) -> Vec<Axis> {
        match &self.directions {
            Some(d) => d.clone(),
            None => (0..self.layers)
                .map(|k| match self.kind {
                    InclusionKind::Channel => Axis::Y1,
                    InclusionKind::Fiber if k % 2 == 0 => Axis::Y2,
                    InclusionKind::Fiber => Axis::Y1,
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<CellSpec> {
        let dirs = self.directions();
        if dirs.len() != self.layers {
            return Err(Error::Config(format!(
                "{} directions given for {} layers",
                dirs.len(),
                self.layers
            )));
        }
        let h = self.thickness() / 2.0;
        let mut spec = CellSpec::homogeneous(self.h1, self.h2, self.thickness(), &self.matrix_material);
        for (k, axis) in dirs.into_iter().enumerate() {
            let c = h - self.cover - self.radius - k as f64 * self.pitch();
            let offset = 0.5 * spec.period(axis.other());
            let inc = match self.kind {
                InclusionKind::Fiber => {
                    let m = self
                        .inclusion_material
                        .as_deref()
                        .ok_or_else(|| Error::Config("fiber plate needs an inclusion material".into()))?;
                    InclusionLayer::fiber(axis, c, self.radius, offset, m)
                }
                InclusionKind::Channel => InclusionLayer::channel(axis, c, self.radius, offset),
            };
            spec.inclusions.push(inc);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_fiber(center: f64, radius: f64, h: f64) -> CellSpec {
        let mut s = CellSpec::homogeneous(1.1, 3.0, 2.0 * h, "matrix");
        s.inclusions.push(InclusionLayer::fiber(Axis::Y2, center, radius, 0.55, "fiber"));
        s
    }

    pub(crate) fn nine_layer() -> LayeredPlate {
        LayeredPlate {
            h1: 1.1,
            h2: 3.0,
            layers: 9,
            radius: 0.45,
            gap: 0.1,
            cover: 0.1,
            kind: InclusionKind::Fiber,
            directions: None,
            matrix_material: "matrix".into(),
            inclusion_material: Some("fiber".into()),
        }
    }

    #[test]
    fn fiber_with_cover_is_valid() {
        assert!(single_fiber(0.0, 0.45, 0.55).validate().is_ok());
    }

    #[test]
    fn radius_equal_to_half_thickness_breaches() {
        let v = single_fiber(0.0, 0.55, 0.55).violations();
        assert!(v.contains(&CellViolation::SurfaceBreach { index: 0 }), "{v:?}");
    }

    #[test]
    fn close_layers_overlap() {
        let mut s = single_fiber(0.0, 0.45, 1.5);
        s.inclusions.push(InclusionLayer::fiber(Axis::Y2, 0.5, 0.45, 0.55, "fiber"));
        let v = s.violations();
        assert!(v.contains(&CellViolation::Overlap { first: 0, second: 1 }), "{v:?}");
    }

    #[test]
    fn reports_every_violation() {
        let mut s = single_fiber(0.0, 0.55, 0.55);
        s.inclusions.push(InclusionLayer::fiber(Axis::Y1, 0.1, 0.3, 1.0, "fiber"));
        s.inclusions.push(InclusionLayer {
            radius: -1.0,
            ..InclusionLayer::channel(Axis::Y1, 0.0, 0.1, 0.0)
        });
        let v = s.violations();
        assert!(v.contains(&CellViolation::SurfaceBreach { index: 0 }));
        assert!(v.contains(&CellViolation::Overlap { first: 0, second: 1 }));
        assert!(v.contains(&CellViolation::NonPositiveRadius { index: 2 }));
        let mut bad = s.clone();
        bad.h1 = 0.0;
        assert_eq!(bad.violations(), vec![CellViolation::NonPositiveDimension("h1")]);
    }

    #[test]
    fn layered_plate_dimensions() {
        let p = nine_layer();
        assert!((p.pitch() - 1.0).abs() < 1e-15);
        assert!((p.thickness() - 9.1).abs() < 1e-12);
        let one = LayeredPlate { layers: 1, ..p.clone() };
        assert!((one.thickness() - 1.1).abs() < 1e-12);
        let spec = p.build().unwrap();
        assert_eq!(spec.inclusions.len(), 9);
        assert_eq!(spec.inclusions[0].axis, Axis::Y2);
        assert_eq!(spec.inclusions[1].axis, Axis::Y1);
        assert!((spec.structural_pitch().unwrap() - 1.0).abs() < 1e-12);
        assert!((spec.repeat_pitch().unwrap() - 2.0).abs() < 1e-12);
        let (b, t) = spec.layer_zone(1).unwrap();
        assert!((t - 4.55).abs() < 1e-12 && (b - 3.55).abs() < 1e-12);
        let (b, t) = spec.layer_zone(9).unwrap();
        assert!((t + 3.45).abs() < 1e-12 && (b + 4.55).abs() < 1e-12);
    }

    #[test]
    fn tiling_counts_and_identity() {
        let spec = nine_layer().build().unwrap();
        assert_eq!(tile_cell(&spec, 1, 1).unwrap(), spec);
        let t = tile_cell(&spec, 2, 1).unwrap();
        assert_eq!(t.inclusions.len(), 18);
        assert!((t.h1 - 2.2).abs() < 1e-15);
        assert_eq!(tile_cell(&spec, 2, 2).unwrap().inclusions.len(), 36);
        assert!(tile_cell(&spec, 0, 1).is_err());
    }

    #[test]
    fn tiled_cell_has_same_occupancy() {
        let spec = nine_layer().build().unwrap();
        let t = tile_cell(&spec, 2, 2).unwrap();
        for &(a, b, c) in &[(0.1, 0.2, 4.0), (1.3, 2.9, 2.95), (0.5, 4.1, -1.0), (2.0, 5.5, 0.0)] {
            let single = spec.occupant([a % spec.h1, b % spec.h2, c]);
            let tiled = t.occupant([a, b, c]);
            let mat = |o: Occupant| match o {
                Occupant::Background(m) => m.to_string(),
                Occupant::Inclusion { material, .. } => material.unwrap_or("void").to_string(),
            };
            assert_eq!(mat(single), mat(tiled));
        }
    }

    #[test]
    fn laminate_background_lookup() {
        let s = CellSpec::laminate(
            1.0,
            1.0,
            vec![
                Ply { thickness: 0.5, material: "soft".into() },
                Ply { thickness: 0.5, material: "stiff".into() },
            ],
        );
        assert!(s.validate().is_ok());
        assert_eq!(s.background_at(-0.3), "soft");
        assert_eq!(s.background_at(0.3), "stiff");
        assert_eq!(s.ply_interfaces(), vec![0.0]);
    }

    proptest! {
        #[test]
        fn tiling_preserves_validity(k1 in 1usize..4, k2 in 1usize..4, layers in 1usize..6) {
            let spec = LayeredPlate { layers, ..nine_layer() }.build().unwrap();
            let t = tile_cell(&spec, k1, k2).unwrap();
            prop_assert!(t.validate().is_ok());
            prop_assert!(t.inclusion_volume_fraction() < 1.0);
            prop_assert!((t.inclusion_volume_fraction() - spec.inclusion_volume_fraction()).abs() < 1e-12);
        }
    }
}
