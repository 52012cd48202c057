//! CSV tables for rigidities, profiles, similarity and wrinkle reports.

use std::path::Path;

use crate::analysis::{
    BoundaryLayer, LayerProfile, SimilarityReport, SkinCoreDecomposition, WrinkleReport,
};
use crate::error::Result;
use crate::homogenization::{RigidityTable, StressField};
use crate::mesh::HexMesh;
use crate::mode::{ModeKey, Order, Pair};
use crate::pcp::SolveReport;

use super::export::{export_field, num, Format};

fn table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// All 36 entries, `nu` and `mu` outermost.
pub fn rigidities_csv(t: &RigidityTable) -> String {
    let mut rows = Vec::new();
    for nu in Order::ALL {
        for mu in Order::ALL {
            for gd in Pair::ALL {
                for ab in Pair::ALL {
                    rows.push(vec![
                        nu.index().to_string(),
                        mu.index().to_string(),
                        gd.label().to_string(),
                        ab.label().to_string(),
                        num(t.get(nu, mu, gd, ab)),
                    ]);
                }
            }
        }
    }
    table("nu,mu,gamma_delta,alpha_beta,value", rows)
}

pub fn neutral_planes_csv(t: &RigidityTable) -> String {
    table(
        "alpha_beta,h",
        Pair::ALL.iter().map(|p| vec![p.label().to_string(), num(t.neutral_planes[p.index()])]),
    )
}

pub fn solver_csv(reports: &[(ModeKey, SolveReport)]) -> String {
    table(
        "mode,iterations,residual",
        reports.iter().map(|(m, r)| vec![m.to_string(), r.iterations.to_string(), num(r.residual)]),
    )
}

/// Slab statistics of every mode's profile, bottom slab first.
pub fn profile_csv(profiles: &[(ModeKey, LayerProfile)]) -> String {
    let rows = profiles.iter().flat_map(|(m, p)| {
        p.slabs.iter().map(move |s| {
            let mut r = vec![m.to_string()];
            r.extend(
                [s.bottom, s.top, s.matrix_mean, s.matrix_max, s.inclusion_mean, s.inclusion_max, s.deviation]
                    .map(num),
            );
            r
        })
    });
    table("mode,bottom,top,matrix_mean,matrix_max,inclusion_mean,inclusion_max,deviation", rows)
}

pub fn boundary_layers_csv(layers: &[(ModeKey, BoundaryLayer)]) -> String {
    let rows = layers.iter().map(|(m, b)| {
        vec![m.to_string(), num(b.top), num(b.bottom), b.pitch.map(num).unwrap_or_default(), num(b.threshold)]
    });
    table("mode,top,bottom,pitch,threshold", rows)
}

pub fn skin_core_csv(parts: &[(ModeKey, SkinCoreDecomposition)]) -> String {
    let rows = parts.iter().flat_map(|(m, d)| {
        [
            ("top_skin", d.top_skin, d.top_layers),
            ("core", d.core, d.core_layers),
            ("bottom_skin", d.bottom_skin, d.bottom_layers),
        ]
        .map(|(name, (lo, hi), n)| vec![m.to_string(), name.to_string(), num(lo), num(hi), n.to_string()])
    });
    table("mode,zone,bottom,top,layers", rows)
}

/// One row per compared zone, representative layers top first.
pub fn similarity_csv(reports: &[(ModeKey, SimilarityReport)]) -> String {
    let rows = reports.iter().flat_map(|(m, r)| {
        r.zones.iter().map(move |z| {
            vec![
                m.to_string(),
                r.alignment.label().to_string(),
                z.layer.to_string(),
                z.source_layer.to_string(),
                num(z.representative_zone.0),
                num(z.representative_zone.1),
                num(z.original_zone.0),
                num(z.original_zone.1),
                num(z.similarity.rel_l2),
                num(z.similarity.rel_max),
                z.similarity.compared.to_string(),
                num(r.threshold),
                z.similarity.verdict.label().to_string(),
            ]
        })
    });
    table(
        "mode,alignment,layer,source_layer,rep_bottom,rep_top,orig_bottom,orig_top,rel_l2,rel_max,compared,threshold,verdict",
        rows,
    )
}

pub fn wrinkle_csv(reports: &[(ModeKey, WrinkleReport)]) -> String {
    let rows = reports.iter().map(|(m, w)| {
        vec![
            m.to_string(),
            w.surface.label().to_string(),
            num(w.amplitude),
            num(w.slope_rms),
            num(w.area_ratio),
            num(w.periodicity_error),
        ]
    });
    table("mode,surface,amplitude,slope_rms,area_ratio,periodicity_error", rows)
}

/// Surface deviation at the face nodes of `mesh`.
pub fn wrinkle_grid_csv(w: &WrinkleReport, mesh: &HexMesh) -> String {
    let (x, y) = (mesh.grid(0), mesh.grid(1));
    let nx = x.len();
    let rows = w.deviation.iter().enumerate().map(|(n, d)| {
        let (i, j) = (n % nx, n / nx);
        vec![i.to_string(), j.to_string(), num(x[i]), num(y[j]), num(*d)]
    });
    table("i,j,x,y,deviation", rows)
}

/// Everything one run produced. Empty parts are skipped by [`ResultBundle::write`].
#[derive(Debug, Clone, Default)]
pub struct ResultBundle {
    pub rigidities: Option<RigidityTable>,
    pub fields: Vec<(String, StressField)>,
    pub profiles: Vec<(ModeKey, LayerProfile)>,
    pub boundary_layers: Vec<(ModeKey, BoundaryLayer)>,
    pub decomposition: Vec<(ModeKey, SkinCoreDecomposition)>,
    pub similarity: Vec<(ModeKey, SimilarityReport)>,
    pub wrinkles: Vec<(ModeKey, WrinkleReport)>,
    pub diagnostics: Vec<(ModeKey, SolveReport)>,
}

impl ResultBundle {
    /// Writes the tables into `dir` and returns the file names, in write order.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let mut put = |name: &str, text: String| -> Result<()> {
            std::fs::write(dir.join(name), text)?;
            files.push(name.to_string());
            Ok(())
        };
        if let Some(t) = &self.rigidities {
            put("rigidities.csv", rigidities_csv(t))?;
            put("neutral_planes.csv", neutral_planes_csv(t))?;
        }
        if !self.profiles.is_empty() {
            put("profile.csv", profile_csv(&self.profiles))?;
        }
        if !self.boundary_layers.is_empty() {
            put("boundary_layers.csv", boundary_layers_csv(&self.boundary_layers))?;
        }
        if !self.decomposition.is_empty() {
            put("skin_core.csv", skin_core_csv(&self.decomposition))?;
        }
        if !self.similarity.is_empty() {
            put("similarity.csv", similarity_csv(&self.similarity))?;
        }
        if !self.wrinkles.is_empty() {
            put("wrinkle.csv", wrinkle_csv(&self.wrinkles))?;
        }
        if !self.diagnostics.is_empty() {
            put("solver.csv", solver_csv(&self.diagnostics))?;
        }
        Ok(files)
    }

    /// Writes every field as `stress_<name>.<ext>` and returns the file names.
    pub fn write_fields(&self, dir: &Path, mesh: &HexMesh, format: Format) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        self.fields
            .iter()
            .map(|(name, field)| {
                let file = field_file_name(name, format);
                export_field(field, mesh, format, dir.join(&file))?;
                Ok(file)
            })
            .collect()
    }
}

/// `stress_11_0.csv` for mode `11:0`.
pub fn field_file_name(name: &str, format: Format) -> String {
    format!("stress_{}.{}", name.replace(':', "_"), format.extension())
}
