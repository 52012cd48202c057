//! Local stresses, homogenized rigidities and neutral planes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::HexMesh;
use crate::mode::{MacroMode, ModeKey, Order, Pair};
use crate::pcp::corrector::check_mesh;
use crate::pcp::{unit_strain_field, CorrectorField, ElementCache, MaterialTable};

/// Symmetric stress in engineering Voigt order `[11, 22, 33, 23, 13, 12]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stress(pub [f64; 6]);

impl Stress {
    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.0[crate::material::voigt_index(i, j)]
    }

    pub fn tensor(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.component(i, j)))
    }

    pub fn von_mises(&self) -> f64 {
        let [s11, s22, s33, s23, s13, s12] = self.0;
        (0.5 * ((s11 - s22).powi(2) + (s22 - s33).powi(2) + (s33 - s11).powi(2))
            + 3.0 * (s12 * s12 + s23 * s23 + s13 * s13))
            .sqrt()
    }

    fn scaled_add(&mut self, w: f64, other: &Stress) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += w * b;
        }
    }
}

/// Element-averaged stress of one cell solution; `None` on void elements.
#[derive(Debug, Clone, PartialEq)]
pub struct StressField {
    /// The mode that produced the field, or `None` for superpositions.
    pub mode: Option<MacroMode>,
    pub elements: Vec<Option<Stress>>,
}

impl StressField {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `σ = a : e(Z)` averaged over the Gauss points of every solid element.
pub fn local_stress(corrector: &CorrectorField, mesh: &HexMesh, materials: &MaterialTable) -> Result<StressField> {
    let cache = ElementCache::new(mesh, materials)?;
    local_stress_cached(corrector, &cache)
}

pub fn local_stress_cached(corrector: &CorrectorField, cache: &ElementCache) -> Result<StressField> {
    check_mesh(corrector, cache.mesh())?;
    let elements = (0..cache.mesh().n_elements())
        .map(|e| {
            cache.gauss_stresses(e, &corrector.displacement).map(|gs| {
                let mut s = [0.0; 6];
                for g in &gs {
                    for c in 0..6 {
                        s[c] += 0.125 * g[c];
                    }
                }
                Stress(s)
            })
        })
        .collect();
    Ok(StressField {
        mode: Some(corrector.mode),
        elements,
    })
}

/// Weighted sum `Σ wₖ σₖ` of fields on the same mesh.
pub fn superpose(terms: &[(f64, &StressField)]) -> Result<StressField> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::Analysis("nothing to superpose".into()));
    };
    let n = first.len();
    let mut out: Vec<Option<Stress>> = first.elements.iter().map(|s| s.map(|_| Stress::default())).collect();
    for (w, f) in terms {
        if f.len() != n {
            return Err(Error::MeshMismatch(format!("{} vs {} elements", f.len(), n)));
        }
        for (o, s) in out.iter_mut().zip(&f.elements) {
            if let (Some(o), Some(s)) = (o.as_mut(), s) {
                o.scaled_add(*w, s);
            }
        }
    }
    Ok(StressField { mode: None, elements: out })
}

/// Local stress of a macroscopic state: membrane entries weight `σ^{αβ0}`,
/// bending entries weight `ε σ^{αβ1}`.
pub fn macro_stress(state: &[(ModeKey, f64)], fields: &[StressField], epsilon: f64) -> Result<StressField> {
    let terms = state
        .iter()
        .map(|&(key, value)| {
            let f = fields
                .iter()
                .find(|f| f.mode.map(|m| m.key()) == Some(key))
                .ok_or_else(|| Error::MissingMode(key.to_string()))?;
            let m = f.mode.unwrap().magnitude;
            if m == 0.0 {
                return Err(Error::ZeroMagnitude);
            }
            let scale = if key.order == Order::Bending { epsilon } else { 1.0 };
            Ok((scale * value / m, f))
        })
        .collect::<Result<Vec<_>>>()?;
    superpose(&terms)
}

pub fn von_mises(field: &StressField) -> Vec<Option<f64>> {
    field.elements.iter().map(|s| s.map(|s| s.von_mises())).collect()
}

/// Homogenized rigidities `A[ν][μ][γδ][αβ]` per unit cell area, with neutral planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityTable {
    pub entries: [[[[f64; 3]; 3]; 2]; 2],
    /// `h^{αβ}` for pairs 11, 22, 12.
    pub neutral_planes: [f64; 3],
}

impl RigidityTable {
    pub fn get(&self, nu: Order, mu: Order, gd: Pair, ab: Pair) -> f64 {
        self.entries[nu.index()][mu.index()][gd.index()][ab.index()]
    }

    /// Membrane (`A⁰`), coupling (`A¹`) or bending (`A²`) diagonal entry for pair `ab`.
    pub fn diagonal(&self, power: usize, ab: Pair) -> f64 {
        let i = ab.index();
        match power {
            0 => self.entries[0][0][i][i],
            1 => self.entries[0][1][i][i],
            2 => self.entries[1][1][i][i],
            _ => panic!("rigidity power is 0, 1 or 2"),
        }
    }

    /// Largest relative violation of `A[ν][μ][γδ][αβ] = A[μ][ν][αβ][γδ]`.
    pub fn reciprocity_error(&self) -> f64 {
        let scale = self.entries.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for nu in 0..2 {
            for mu in 0..2 {
                for g in 0..3 {
                    for a in 0..3 {
                        let d = (self.entries[nu][mu][g][a] - self.entries[mu][nu][a][g]).abs();
                        worst = worst.max(d / scale);
                    }
                }
            }
        }
        worst
    }
}

/// Rigidities from the six unit correctors.
///
/// Each entry is the pairing `(1/|P₂|) ∫ σ(Z^{αβν}) : e(ξ^{γδμ})` evaluated with
/// the element strain operators, i.e. Gauss quadrature of `σ^{αβν}_{γδ} y₃^μ`.
pub fn compute_rigidities(correctors: &[CorrectorField], mesh: &HexMesh, materials: &MaterialTable) -> Result<RigidityTable> {
    let cache = ElementCache::new(mesh, materials)?;
    compute_rigidities_cached(correctors, &cache)
}

pub fn compute_rigidities_cached(correctors: &[CorrectorField], cache: &ElementCache) -> Result<RigidityTable> {
    let mesh = cache.mesh();
    let area = mesh.spec().h1 * mesh.spec().h2;
    let mut entries = [[[[0.0; 3]; 3]; 2]; 2];
    let unit: Vec<Vec<[f64; 3]>> = MacroMode::all_unit()
        .iter()
        .map(|&m| {
            let xi = unit_strain_field(m);
            mesh.nodes().iter().map(|&y| xi.eval(y)).collect()
        })
        .collect();
    for ab in Pair::ALL {
        for nu in Order::ALL {
            let key = ModeKey { pair: ab, order: nu };
            let c = correctors
                .iter()
                .find(|c| c.mode.key() == key)
                .ok_or_else(|| Error::MissingMode(key.to_string()))?;
            check_mesh(c, mesh)?;
            if c.mode.magnitude == 0.0 {
                return Err(Error::ZeroMagnitude);
            }
            for (k, test) in MacroMode::all_unit().iter().enumerate() {
                let value = cache.pairing(&c.displacement, &unit[k]) / (area * c.mode.magnitude);
                entries[nu.index()][test.order.index()][test.pair.index()][ab.index()] = value;
            }
        }
    }
    let mut table = RigidityTable {
        entries,
        neutral_planes: [0.0; 3],
    };
    for ab in Pair::ALL {
        table.neutral_planes[ab.index()] = neutral_plane(&table, ab)?;
    }
    Ok(table)
}

/// Offset `h^{αβ}` that removes the diagonal membrane-bending coupling for `ab`.
pub fn neutral_plane(table: &RigidityTable, ab: Pair) -> Result<f64> {
    let a0 = table.diagonal(0, ab);
    let scale = table.entries[0][0].iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(a0.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateRigidity(ab.to_string()));
    }
    Ok(table.diagonal(1, ab) / a0)
}

/// Re-expresses the table about the plane `y₃ = h` (parallel-axis transform).
pub fn shift_rigidities(table: &RigidityTable, h: f64) -> RigidityTable {
    let e = &table.entries;
    let mut out = *e;
    for g in 0..3 {
        for a in 0..3 {
            out[0][1][g][a] = e[0][1][g][a] - h * e[0][0][g][a];
            out[1][0][g][a] = e[1][0][g][a] - h * e[0][0][g][a];
            out[1][1][g][a] = e[1][1][g][a] - h * (e[0][1][g][a] + e[1][0][g][a]) + h * h * e[0][0][g][a];
        }
    }
    RigidityTable {
        entries: out,
        neutral_planes: table.neutral_planes.map(|p| p - h),
    }
}
