//! Stress-field files: legacy ASCII VTK and CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogenization::{Stress, StressField};
use crate::mesh::{HexMesh, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Vtk,
    #[default]
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Vtk => "vtk",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vtk" => Ok(Format::Vtk),
            "csv" => Ok(Format::Csv),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub const CSV_HEADER: &str = "x,y,z,phase,s11,s22,s33,s12,s23,s13,von_mises";

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn phase_label(mesh: &HexMesh, p: Phase) -> &str {
    match p.material() {
        Some(m) => &mesh.materials()[m],
        None => "void",
    }
}

/// Stress in CSV column order `s11, s22, s33, s12, s23, s13`.
fn csv_components(s: &Stress) -> [f64; 6] {
    let v = s.0;
    [v[0], v[1], v[2], v[5], v[3], v[4]]
}

fn check(field: &StressField, mesh: &HexMesh) -> Result<()> {
    if field.len() != mesh.n_elements() {
        return Err(Error::MeshMismatch(format!(
            "{} stresses for {} elements",
            field.len(),
            mesh.n_elements()
        )));
    }
    Ok(())
}

/// One row per solid element: centroid, phase, stress and von Mises.
pub fn field_to_csv(field: &StressField, mesh: &HexMesh) -> Result<String> {
    check(field, mesh)?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (e, s) in field.elements.iter().enumerate() {
        let Some(s) = s else { continue };
        let c = mesh.element_centroid(e);
        let cols: Vec<String> = c
            .iter()
            .map(|&v| num(v))
            .chain(std::iter::once(phase_label(mesh, mesh.phase(e)).to_string()))
            .chain(csv_components(s).iter().map(|&v| num(v)))
            .chain(std::iter::once(num(s.von_mises())))
            .collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Unstructured-grid VTK with the solid elements only.
pub fn field_to_vtk(field: &StressField, mesh: &HexMesh, title: &str) -> Result<String> {
    check(field, mesh)?;
    let solid: Vec<usize> = (0..mesh.n_elements()).filter(|&e| field.elements[e].is_some()).collect();
    let mut index = vec![usize::MAX; mesh.n_nodes()];
    let mut points = Vec::new();
    for &e in &solid {
        for &n in &mesh.elements()[e] {
            if index[n] == usize::MAX {
                index[n] = points.len();
                points.push(n);
            }
        }
    }
    let mut out = String::new();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(out, "POINTS {} double", points.len()).unwrap();
    for &n in &points {
        let y = mesh.nodes()[n];
        writeln!(out, "{} {} {}", num(y[0]), num(y[1]), num(y[2])).unwrap();
    }
    writeln!(out, "CELLS {} {}", solid.len(), 9 * solid.len()).unwrap();
    for &e in &solid {
        let ids: Vec<String> = mesh.elements()[e].iter().map(|&n| index[n].to_string()).collect();
        writeln!(out, "8 {}", ids.join(" ")).unwrap();
    }
    writeln!(out, "CELL_TYPES {}", solid.len()).unwrap();
    for _ in &solid {
        out.push_str("12\n");
    }
    writeln!(out, "CELL_DATA {}", solid.len()).unwrap();
    out.push_str("SCALARS von_mises double 1\nLOOKUP_TABLE default\n");
    for &e in &solid {
        writeln!(out, "{}", num(field.elements[e].unwrap().von_mises())).unwrap();
    }
    out.push_str("TENSORS stress double\n");
    for &e in &solid {
        let t = field.elements[e].unwrap().tensor();
        for row in t {
            writeln!(out, "{} {} {}", num(row[0]), num(row[1]), num(row[2])).unwrap();
        }
    }
    Ok(out)
}

pub fn export_field(field: &StressField, mesh: &HexMesh, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let text = match format {
        Format::Csv => field_to_csv(field, mesh)?,
        Format::Vtk => field_to_vtk(field, mesh, "platecell stress field")?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// A parsed row of a stress CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub centroid: [f64; 3],
    pub phase: String,
    pub stress: Stress,
    pub von_mises: f64,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config(format!("stress CSV must start with `{CSV_HEADER}`")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = |what: &str| Error::Config(format!("stress CSV line {}: {what}", i + 2));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 11 {
                return Err(bad("expected 11 columns"));
            }
            let f = |k: usize| cols[k].parse::<f64>().map_err(|_| bad("not a number"));
            let c = [f(4)?, f(5)?, f(6)?, f(7)?, f(8)?, f(9)?];
            Ok(CsvRow {
                centroid: [f(0)?, f(1)?, f(2)?],
                phase: cols[3].to_string(),
                stress: Stress([c[0], c[1], c[2], c[4], c[5], c[3]]),
                von_mises: f(10)?,
            })
        })
        .collect()
}

pub fn read_field_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    parse_field_csv(&std::fs::read_to_string(path)?)
}

/// Places CSV rows back onto the solid elements of `mesh`, in file order.
pub fn field_from_rows(rows: &[CsvRow], mesh: &HexMesh) -> Result<StressField> {
    let solid: Vec<usize> = (0..mesh.n_elements()).filter(|&e| !mesh.phase(e).is_void()).collect();
    if solid.len() != rows.len() {
        return Err(Error::MeshMismatch(format!("{} rows for {} solid elements", rows.len(), solid.len())));
    }
    let mut elements = vec![None; mesh.n_elements()];
    let tol = 1e-9 * mesh.spec().half_thickness.max(mesh.spec().h1).max(mesh.spec().h2);
    for (&e, row) in solid.iter().zip(rows) {
        let c = mesh.element_centroid(e);
        if (0..3).any(|d| (c[d] - row.centroid[d]).abs() > tol) {
            return Err(Error::MeshMismatch(format!("row for element {e} has centroid {:?}", row.centroid)));
        }
        elements[e] = Some(row.stress);
    }
    Ok(StressField { mode: None, elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{Axis, CellSpec, InclusionLayer};
    use crate::mesh::generate_mesh;

    fn uniform(mesh: &HexMesh) -> StressField {
        StressField {
            mode: None,
            elements: (0..mesh.n_elements())
                .map(|e| (!mesh.phase(e).is_void()).then(|| Stress([1.0, 2.0, 0.0, 0.25, -0.5, 1.0 / 3.0])))
                .collect(),
        }
    }

    #[test]
    fn vtk_structure() {
        let mesh = generate_mesh(&CellSpec::homogeneous(1.0, 1.0, 1.0, "m"), [2, 2, 2]).unwrap();
        let vtk = field_to_vtk(&uniform(&mesh), &mesh, "t").unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0\nt\nASCII\nDATASET UNSTRUCTURED_GRID\n"));
        assert!(vtk.contains("POINTS 27 double\n"));
        assert!(vtk.contains("CELLS 8 72\n"));
        assert!(vtk.contains("CELL_DATA 8\n"));
        assert_eq!(vtk.matches("SCALARS").count(), 1);
    }

    #[test]
    fn voids_are_left_out() {
        let mut spec = CellSpec::homogeneous(1.0, 1.0, 1.0, "m");
        spec.inclusions.push(InclusionLayer::channel(Axis::Y1, 0.0, 0.3, 0.5));
        let mesh = generate_mesh(&spec, [2, 8, 8]).unwrap();
        let solid = (0..mesh.n_elements()).filter(|&e| !mesh.phase(e).is_void()).count();
        assert!(solid < mesh.n_elements());
        let field = uniform(&mesh);
        assert!(field_to_vtk(&field, &mesh, "c").unwrap().contains(&format!("CELL_DATA {solid}\n")));
        let csv = field_to_csv(&field, &mesh).unwrap();
        assert_eq!(csv.lines().count(), solid + 1);
        assert!(!csv.contains("void"));
    }

    #[test]
    fn csv_round_trip() {
        let mut spec = CellSpec::homogeneous(1.1, 1.3, 1.2, "matrix");
        spec.inclusions.push(InclusionLayer::fiber(Axis::Y2, 0.0, 0.4, 0.55, "fiber"));
        let mesh = generate_mesh(&spec, [4, 3, 6]).unwrap();
        let mut field = uniform(&mesh);
        for (e, s) in field.elements.iter_mut().enumerate() {
            if let Some(s) = s {
                s.0[3] = (e as f64).sin() * 1e-7;
                s.0[0] = std::f64::consts::PI * e as f64;
            }
        }
        let csv = field_to_csv(&field, &mesh).unwrap();
        assert!(csv.starts_with("x,y,z,phase,s11,s22,s33,s12,s23,s13,von_mises\n"));
        assert!(csv.contains(",fiber,") && csv.contains(",matrix,"));
        let rows = parse_field_csv(&csv).unwrap();
        let back = field_from_rows(&rows, &mesh).unwrap();
        for (a, b) in field.elements.iter().zip(&back.elements) {
            let (a, b) = (a.unwrap(), b.unwrap());
            for c in 0..6 {
                assert!((a.0[c] - b.0[c]).abs() <= 1e-12 * a.0[c].abs().max(1.0));
            }
        }
        assert!(rows.iter().zip(field.elements.iter().flatten()).all(|(r, s)| (r.von_mises - s.von_mises()).abs() < 1e-12));
        assert_eq!(field_to_csv(&back, &mesh).unwrap(), csv);
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("xml".parse::<Format>(), Err(Error::UnsupportedFormat(_))));
        assert_eq!("vtk".parse::<Format>().unwrap(), Format::Vtk);
    }
}
