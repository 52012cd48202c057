//! Assembly of the periodic cell operator and the PCG driver.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix6, SVector, Vector6};
use rayon::prelude::*;

use super::affine::unit_strain_field;
use super::element::{box_element, gauss_points, ElementMatrices};
use super::multigrid::{pin_inactive, Grid, Multigrid};
use super::sparse::{axpy, dot, Csr};
use crate::error::{Error, Result};
use crate::material::{laminate_mix, ElasticityTensor};
use crate::mesh::{HexMesh, LOCAL_OFFSETS, MIXTURE_SAMPLES};
use crate::mode::MacroMode;

/// Elasticity tensors keyed by material id.
pub type MaterialTable = BTreeMap<String, ElasticityTensor>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when the residual norm falls below `tolerance` times the initial one.
    pub tolerance: f64,
    /// Defaults to `50·√dofs`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final residual relative to the initial residual.
    pub residual: f64,
}

/// Total displacement `Z = m(ξ + N)` of one cell problem, at every mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorField {
    pub mode: MacroMode,
    pub displacement: Vec<[f64; 3]>,
    pub report: SolveReport,
}

/// Element stiffness, unique per layer and material make-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum TypeKey {
    Uniform { layer: usize, material: usize },
    Mixed { layer: usize, background: usize, inclusion: usize, count: u32, normal: [i64; 3] },
}

/// Element matrices of a mesh, shared by every element of the same layer and
/// material make-up. Elements cut by a fiber surface use the laminate mixture
/// of their two materials.
#[derive(Debug, Clone)]
pub struct ElementCache<'m> {
    mesh: &'m HexMesh,
    tensors: Vec<Matrix6<f64>>,
    types: Vec<ElementMatrices>,
    etype: Vec<Option<usize>>,
}

impl<'m> ElementCache<'m> {
    pub fn new(mesh: &'m HexMesh, materials: &MaterialTable) -> Result<Self> {
        let base: Vec<Matrix6<f64>> = mesh
            .materials()
            .iter()
            .map(|id| {
                materials
                    .get(id)
                    .map(|t| *t.voigt())
                    .ok_or_else(|| Error::MissingMaterial(id.clone()))
            })
            .collect::<Result<_>>()?;
        let [n1, n2, _] = mesh.resolution();
        let spec = mesh.spec();
        let (dx, dy) = (spec.h1 / n1 as f64, spec.h2 / n2 as f64);
        let samples = (MIXTURE_SAMPLES * MIXTURE_SAMPLES * MIXTURE_SAMPLES) as f64;
        let keyed: Vec<Option<(TypeKey, Matrix6<f64>)>> = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let material = mesh.phase(e).material()?;
                let layer = mesh.element_grid_index(e)[2];
                Some(match mesh.mixture(e) {
                    Some(m) => {
                        let c = laminate_mix(&base[m.inclusion_material], &base[m.background], m.fraction, m.normal);
                        let key = TypeKey::Mixed {
                            layer,
                            background: m.background,
                            inclusion: m.inclusion_material,
                            count: (m.fraction * samples).round() as u32,
                            normal: m.normal.map(|v| (v * 1e9).round() as i64),
                        };
                        (key, c)
                    }
                    None => (TypeKey::Uniform { layer, material }, base[material]),
                })
            })
            .collect();
        let mut keys: HashMap<TypeKey, usize> = HashMap::new();
        let mut pending: Vec<(usize, Matrix6<f64>)> = Vec::new();
        let etype: Vec<Option<usize>> = keyed
            .iter()
            .map(|entry| {
                let (key, c) = entry.as_ref()?;
                let layer = match *key {
                    TypeKey::Uniform { layer, .. } | TypeKey::Mixed { layer, .. } => layer,
                };
                Some(*keys.entry(*key).or_insert_with(|| {
                    pending.push((layer, *c));
                    pending.len() - 1
                }))
            })
            .collect();
        let types = pending
            .par_iter()
            .map(|(layer, c)| {
                let (lo, hi) = mesh.layer_bounds(*layer);
                box_element([dx, dy, hi - lo], c)
            })
            .collect();
        let tensors = pending.into_iter().map(|(_, c)| c).collect();
        Ok(Self {
            mesh,
            tensors,
            types,
            etype,
        })
    }

    pub fn mesh(&self) -> &'m HexMesh {
        self.mesh
    }

    /// Condensed matrices of element `e`, `None` for voids.
    pub fn element(&self, e: usize) -> Option<&ElementMatrices> {
        self.etype[e].map(|t| &self.types[t])
    }

    /// Voigt stiffness of element `e`, `None` for voids.
    pub fn tensor(&self, e: usize) -> Option<&Matrix6<f64>> {
        self.etype[e].map(|t| &self.tensors[t])
    }

    /// Number of distinct element matrices.
    pub fn n_types(&self) -> usize {
        self.types.len()
    }

    pub fn element_dofs(&self, e: usize, field: &[[f64; 3]]) -> SVector<f64, 24> {
        let conn = &self.mesh.elements()[e];
        SVector::from_fn(|d, _| field[conn[d / 3]][d % 3])
    }

    /// Engineering strain at the eight Gauss points of element `e`.
    pub fn gauss_strains(&self, e: usize, field: &[[f64; 3]]) -> Option<[Vector6<f64>; 8]> {
        let m = self.element(e)?;
        let u = self.element_dofs(e, field);
        Some(std::array::from_fn(|q| m.strain_ops[q] * u))
    }

    /// Stress at the eight Gauss points of element `e` (Voigt order 11, 22, 33, 23, 13, 12).
    pub fn gauss_stresses(&self, e: usize, field: &[[f64; 3]]) -> Option<[Vector6<f64>; 8]> {
        let d = self.tensor(e)?;
        self.gauss_strains(e, field).map(|s| s.map(|x| d * x))
    }

    /// Physical position of the Gauss points of element `e`.
    pub fn gauss_positions(&self, e: usize) -> [[f64; 3]; 8] {
        let [i, j, k] = self.mesh.element_grid_index(e);
        let lo = [self.mesh.grid(0)[i], self.mesh.grid(1)[j], self.mesh.grid(2)[k]];
        let size = self.mesh.element_size(e);
        gauss_points().map(|p| [0, 1, 2].map(|a| lo[a] + 0.5 * (1.0 + p[a]) * size[a]))
    }

    /// Unassembled nodal forces `K u` on the full node set.
    pub fn nodal_forces(&self, field: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let mut f = vec![[0.0; 3]; self.mesh.n_nodes()];
        for (e, conn) in self.mesh.elements().iter().enumerate() {
            let Some(m) = self.element(e) else { continue };
            let fe = m.stiffness * self.element_dofs(e, field);
            for (a, &n) in conn.iter().enumerate() {
                for c in 0..3 {
                    f[n][c] += fe[3 * a + c];
                }
            }
        }
        f
    }

    /// Discrete energy pairing `∫ σ(u) : e(v)` over the solid elements.
    pub fn pairing(&self, u: &[[f64; 3]], v: &[[f64; 3]]) -> f64 {
        (0..self.mesh.n_elements())
            .filter_map(|e| {
                let m = self.element(e)?;
                Some(self.element_dofs(e, v).dot(&(m.stiffness * self.element_dofs(e, u))))
            })
            .sum()
    }

    /// Volume average of a nodal field over the solid elements.
    pub fn solid_mean(&self, field: &[[f64; 3]]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        let mut vol = 0.0;
        for (e, conn) in self.mesh.elements().iter().enumerate() {
            if self.etype[e].is_none() {
                continue;
            }
            let v = self.mesh.element_volume(e);
            vol += v;
            for &n in conn {
                for c in 0..3 {
                    acc[c] += 0.125 * v * field[n][c];
                }
            }
        }
        acc.map(|a| a / vol)
    }
}

/// The assembled operator of one mesh with its preconditioner. Build once, solve many modes.
pub struct CellSystem<'m> {
    cache: ElementCache<'m>,
    active: Vec<bool>,
    mg: Multigrid,
}

impl<'m> std::ops::Deref for CellSystem<'m> {
    type Target = ElementCache<'m>;

    fn deref(&self) -> &Self::Target {
        &self.cache
    }
}

const NEIGHBOURS: usize = 27;

fn local_index(off: [usize; 3]) -> usize {
    LOCAL_OFFSETS.iter().position(|&o| o == off).unwrap()
}

impl<'m> CellSystem<'m> {
    pub fn new(mesh: &'m HexMesh, materials: &MaterialTable) -> Result<Self> {
        let cache = ElementCache::new(mesh, materials)?;
        let [n1, n2, n3] = mesh.resolution();
        let spec = mesh.spec();
        let etype = &cache.etype;
        let types = &cache.types;
        let nm = mesh.n_master_nodes();
        let mut active = vec![false; nm];
        let mut parent: Vec<usize> = (0..nm).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (e, conn) in mesh.elements().iter().enumerate() {
            if etype[e].is_none() {
                continue;
            }
            let first = mesh.master_of(conn[0]);
            for &n in conn {
                let m = mesh.master_of(n);
                active[m] = true;
                let (a, b) = (find(&mut parent, first), find(&mut parent, m));
                parent[a] = b;
            }
        }
        let mut roots: Vec<usize> = (0..nm).filter(|&m| active[m]).map(|m| find(&mut parent, m)).collect();
        roots.sort_unstable();
        roots.dedup();
        match roots.len() {
            0 => return Err(Error::SingularSystem("the cell has no solid elements".into())),
            1 => {}
            c => {
                return Err(Error::SingularSystem(format!(
                    "solid phase splits into {c} disconnected parts"
                )))
            }
        }

        let rows: Vec<Vec<Vec<(usize, f64)>>> = (0..nm)
            .into_par_iter()
            .map(|m| {
                let (i, j, k) = (m % n1, (m / n1) % n2, m / (n1 * n2));
                let mut cols: Vec<usize> = Vec::with_capacity(NEIGHBOURS);
                let mut blocks: Vec<[[f64; 3]; 3]> = Vec::with_capacity(NEIGHBOURS);
                for off in LOCAL_OFFSETS {
                    let (ie, je) = ((i + n1 - off[0]) % n1, (j + n2 - off[1]) % n2);
                    if k < off[2] || k - off[2] >= n3 {
                        continue;
                    }
                    let ke = k - off[2];
                    let e = mesh.element_id(ie, je, ke);
                    let Some(t) = etype[e] else { continue };
                    let kmat = &types[t].stiffness;
                    let a = local_index(off);
                    for (b, ob) in LOCAL_OFFSETS.iter().enumerate() {
                        let col = mesh.master_of_grid(ie + ob[0], je + ob[1], ke + ob[2]);
                        let slot = match cols.iter().position(|&c| c == col) {
                            Some(s) => s,
                            None => {
                                cols.push(col);
                                blocks.push([[0.0; 3]; 3]);
                                cols.len() - 1
                            }
                        };
                        for r in 0..3 {
                            for c in 0..3 {
                                blocks[slot][r][c] += kmat[(3 * a + r, 3 * b + c)];
                            }
                        }
                    }
                }
                (0..3)
                    .map(|r| {
                        cols.iter()
                            .zip(&blocks)
                            .flat_map(|(&col, blk)| (0..3).map(move |c| (3 * col + c, blk[r][c])))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let a = Csr::from_rows(3 * nm, rows.into_iter().flatten().collect());
        let a = pin_inactive(a, &active);
        let grid = Grid {
            coords: [
                mesh.grid(0)[..n1].to_vec(),
                mesh.grid(1)[..n2].to_vec(),
                mesh.grid(2).to_vec(),
            ],
            periods: [spec.h1, spec.h2],
        };
        let mg = Multigrid::new(a, grid, active.clone())?;
        Ok(Self { cache, active, mg })
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.mesh().n_master_nodes()
    }

    pub fn operator(&self) -> &Csr {
        self.mg.operator()
    }

    pub fn multigrid_levels(&self) -> usize {
        self.mg.n_levels()
    }

    /// Solves the cell problem for `mode`; the result has zero mean over the solid.
    pub fn solve(&self, mode: MacroMode, opts: &SolverOptions) -> Result<CorrectorField> {
        let mesh = self.mesh();
        let xi = unit_strain_field(mode);
        let m = mode.magnitude;
        let base: Vec<[f64; 3]> = mesh.nodes().iter().map(|&y| xi.eval(y).map(|v| m * v)).collect();
        let nm = mesh.n_master_nodes();

        // Residual of the affine guess, gathered onto the masters.
        let forces = self.nodal_forces(&base);
        let mut r = vec![0.0; 3 * nm];
        for (n, f) in forces.iter().enumerate() {
            let mm = mesh.master_of(n);
            for c in 0..3 {
                r[3 * mm + c] -= f[c];
            }
        }
        let scale = forces
            .iter()
            .map(|f| f.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        self.project(&mut r);
        let (delta, report) = self.pcg(r, scale, opts)?;

        let mut z: Vec<[f64; 3]> = (0..mesh.n_nodes())
            .map(|n| {
                let mm = mesh.master_of(n);
                let b = base[n];
                [b[0] + delta[3 * mm], b[1] + delta[3 * mm + 1], b[2] + delta[3 * mm + 2]]
            })
            .collect();
        let mean = self.solid_mean(&z);
        for v in &mut z {
            for c in 0..3 {
                v[c] -= mean[c];
            }
        }
        Ok(CorrectorField {
            mode,
            displacement: z,
            report,
        })
    }

    /// Solves several modes, in parallel when threads are available.
    pub fn solve_all(&self, modes: &[MacroMode], opts: &SolverOptions) -> Result<Vec<CorrectorField>> {
        modes.par_iter().map(|&md| self.solve(md, opts)).collect()
    }

    /// Removes rigid translations and clears inactive dofs.
    fn project(&self, x: &mut [f64]) {
        let n_active = self.active.iter().filter(|&&a| a).count() as f64;
        let mut mean = [0.0; 3];
        for (n, &a) in self.active.iter().enumerate() {
            if a {
                for c in 0..3 {
                    mean[c] += x[3 * n + c];
                }
            }
        }
        for (n, &a) in self.active.iter().enumerate() {
            for c in 0..3 {
                x[3 * n + c] = if a { x[3 * n + c] - mean[c] / n_active } else { 0.0 };
            }
        }
    }

    fn pcg(&self, mut r: Vec<f64>, scale: f64, opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
        let n = r.len();
        let a = self.mg.operator();
        let mut x = vec![0.0; n];
        let r0 = dot(&r, &r).sqrt();
        if r0 <= 1e-14 * scale || r0 == 0.0 {
            return Ok((x, SolveReport { iterations: 0, residual: 0.0 }));
        }
        let max_it = opts
            .max_iterations
            .unwrap_or_else(|| (50.0 * (n as f64).sqrt()).ceil() as usize);
        let precondition = |r: &[f64]| {
            let mut z = self.mg.apply(r);
            self.project(&mut z);
            z
        };
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        let mut rel = 1.0;
        for it in 1..=max_it {
            a.matvec(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 || !pq.is_finite() {
                return Err(Error::SingularSystem(format!(
                    "operator lost positive definiteness at iteration {it}"
                )));
            }
            let alpha = rz / pq;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &q, &mut r);
            rel = dot(&r, &r).sqrt() / r0;
            if rel <= opts.tolerance {
                return Ok((x, SolveReport { iterations: it, residual: rel }));
            }
            z = precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NotConverged {
            iterations: max_it,
            residual: rel,
        })
    }
}

/// Convenience wrapper: assemble and solve a single mode.
pub fn solve_pcp(
    mesh: &HexMesh,
    materials: &MaterialTable,
    mode: MacroMode,
    opts: &SolverOptions,
) -> Result<CorrectorField> {
    CellSystem::new(mesh, materials)?.solve(mode, opts)
}
