//! Geometric multigrid on the structured master grid.
//!
//! Each level halves the node count along every axis that is not markedly
//! coarser than the others; periodic axes wrap. Prolongation is trilinear in
//! the grid coordinates, coarse operators are Galerkin products, smoothing
//! is Chebyshev-accelerated 3×3 block Jacobi and the coarsest level is
//! factored densely. The cycle is symmetric, so it is a valid CG
//! preconditioner.

use nalgebra::{DMatrix, Matrix3};

use super::sparse::{axpy, Csr};
use crate::error::{Error, Result};

/// Nodes of a structured grid: axes 0 and 1 periodic, axis 2 open.
#[derive(Debug, Clone)]
pub struct Grid {
    pub coords: [Vec<f64>; 3],
    pub periods: [f64; 2],
}

impl Grid {
    pub fn dims(&self) -> [usize; 3] {
        [self.coords[0].len(), self.coords[1].len(), self.coords[2].len()]
    }

    pub fn n_nodes(&self) -> usize {
        self.dims().iter().product()
    }

    fn spacing(&self, axis: usize) -> f64 {
        let c = &self.coords[axis];
        let len = if axis < 2 {
            self.periods[axis]
        } else {
            c[c.len() - 1] - c[0]
        };
        let intervals = if axis < 2 { c.len() } else { c.len() - 1 };
        len / intervals as f64
    }
}

type Interp1d = Vec<Vec<(usize, f64)>>;

fn coarsen_axis(c: &[f64], period: Option<f64>) -> Option<(Vec<f64>, Interp1d)> {
    let m = c.len();
    let keep: Vec<usize> = match period {
        Some(_) if m >= 4 => (0..m).step_by(2).collect(),
        None if m >= 3 => {
            let mut k: Vec<usize> = (0..m).step_by(2).collect();
            if (m - 1) % 2 == 1 {
                k.push(m - 1);
            }
            k
        }
        _ => return None,
    };
    let mut coarse_of = vec![usize::MAX; m];
    for (ci, &f) in keep.iter().enumerate() {
        coarse_of[f] = ci;
    }
    let interp = (0..m)
        .map(|f| {
            if coarse_of[f] != usize::MAX {
                return vec![(coarse_of[f], 1.0)];
            }
            let (l, xl) = (coarse_of[f - 1], c[f - 1]);
            let (r, xr) = if f + 1 < m {
                (coarse_of[f + 1], c[f + 1])
            } else {
                (0, c[0] + period.expect("only periodic axes wrap"))
            };
            let t = (c[f] - xl) / (xr - xl);
            vec![(l, 1.0 - t), (r, t)]
        })
        .collect();
    Some((keep.iter().map(|&f| c[f]).collect(), interp))
}

fn identity_axis(c: &[f64]) -> (Vec<f64>, Interp1d) {
    (c.to_vec(), (0..c.len()).map(|i| vec![(i, 1.0)]).collect())
}

/// Coarse grid and dof-level prolongation, or `None` when nothing coarsens.
fn coarsen(grid: &Grid, fine_active: &[bool]) -> Option<(Grid, Csr)> {
    let hmin = (0..3)
        .filter(|&a| grid.coords[a].len() >= 3)
        .map(|a| grid.spacing(a))
        .fold(f64::INFINITY, f64::min);
    let mut any = false;
    let axes: Vec<(Vec<f64>, Interp1d)> = (0..3)
        .map(|a| {
            let period = (a < 2).then(|| grid.periods[a]);
            if grid.spacing(a) <= 1.8 * hmin {
                if let Some(r) = coarsen_axis(&grid.coords[a], period) {
                    any = true;
                    return r;
                }
            }
            identity_axis(&grid.coords[a])
        })
        .collect();
    if !any {
        return None;
    }
    let coarse = Grid {
        coords: [axes[0].0.clone(), axes[1].0.clone(), axes[2].0.clone()],
        periods: grid.periods,
    };
    let [f0, f1, _] = grid.dims();
    let [c0, c1, _] = coarse.dims();
    let n_coarse = coarse.n_nodes();
    let mut rows = Vec::with_capacity(3 * grid.n_nodes());
    for node in 0..grid.n_nodes() {
        let (i, j, k) = (node % f0, (node / f0) % f1, node / (f0 * f1));
        let mut entries = Vec::new();
        if fine_active[node] {
            for &(ci, wi) in &axes[0].1[i] {
                for &(cj, wj) in &axes[1].1[j] {
                    for &(ck, wk) in &axes[2].1[k] {
                        let w = wi * wj * wk;
                        if w != 0.0 {
                            entries.push((ci + c0 * (cj + c1 * ck), w));
                        }
                    }
                }
            }
        }
        for c in 0..3 {
            rows.push(entries.iter().map(|&(n, w)| (3 * n + c, w)).collect());
        }
    }
    Some((coarse, Csr::from_rows(3 * n_coarse, rows)))
}

fn block_inverses(a: &Csr) -> Result<Vec<Matrix3<f64>>> {
    (0..a.n_rows / 3)
        .map(|n| {
            let mut b = Matrix3::zeros();
            for r in 0..3 {
                for c in 0..3 {
                    b[(r, c)] = a.get(3 * n + r, 3 * n + c);
                }
            }
            b.try_inverse()
                .ok_or_else(|| Error::SingularSystem(format!("singular diagonal block at node {n}")))
        })
        .collect()
}

fn apply_blocks(blocks: &[Matrix3<f64>], r: &[f64], out: &mut [f64]) {
    for (n, b) in blocks.iter().enumerate() {
        let v = b * nalgebra::Vector3::new(r[3 * n], r[3 * n + 1], r[3 * n + 2]);
        out[3 * n..3 * n + 3].copy_from_slice(v.as_slice());
    }
}

struct Level {
    a: Csr,
    blocks: Vec<Matrix3<f64>>,
    lambda_max: f64,
    /// Prolongation from the next coarser level.
    p: Option<Csr>,
    r: Option<Csr>,
}

pub struct Multigrid {
    levels: Vec<Level>,
    coarse: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

const COARSE_DOFS: usize = 1200;
const MAX_LEVELS: usize = 12;
const CHEB_DEGREE: usize = 2;
const CHEB_RATIO: f64 = 20.0;

fn estimate_lambda_max(a: &Csr, blocks: &[Matrix3<f64>]) -> f64 {
    let n = a.n_rows;
    let mut x: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.754_877_666 + 0.1).fract() - 0.5).collect();
    let mut ax = vec![0.0; n];
    let mut lam = 1.0;
    for _ in 0..15 {
        a.matvec(&x, &mut ax);
        apply_blocks(blocks, &ax, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        lam = norm;
    }
    // Power iteration approaches from below.
    1.1 * lam
}

impl Multigrid {
    /// `a` acts on 3 dofs per grid node; rows of inactive nodes must be identity.
    pub fn new(a: Csr, grid: Grid, active: Vec<bool>) -> Result<Self> {
        let mut levels = Vec::new();
        let mut a = a;
        let mut grid = grid;
        let mut active = active;
        loop {
            let blocks = block_inverses(&a)?;
            let lambda_max = estimate_lambda_max(&a, &blocks);
            let next = if a.n_rows > COARSE_DOFS && levels.len() + 1 < MAX_LEVELS {
                coarsen(&grid, &active)
            } else {
                None
            };
            match next {
                None => {
                    levels.push(Level {
                        a,
                        blocks,
                        lambda_max,
                        p: None,
                        r: None,
                    });
                    break;
                }
                Some((cgrid, p)) => {
                    let r = p.transpose();
                    let mut ac = r.matmul(&a.matmul(&p));
                    let cactive: Vec<bool> = (0..cgrid.n_nodes()).map(|n| !r.row(3 * n).0.is_empty()).collect();
                    ac = pin_inactive(ac, &cactive);
                    levels.push(Level {
                        a,
                        blocks,
                        lambda_max,
                        p: Some(p),
                        r: Some(r),
                    });
                    a = ac;
                    grid = cgrid;
                    active = cactive;
                }
            }
        }
        let last = levels.last().unwrap();
        let mut dense = last.a.to_dense();
        let n = dense.nrows();
        let mean_diag = (0..n).map(|i| dense[(i, i)]).sum::<f64>() / n as f64;
        let n_active = active.iter().filter(|&&x| x).count().max(1);
        for c in 0..3 {
            let idx: Vec<usize> = (0..n / 3).filter(|&k| active[k]).map(|k| 3 * k + c).collect();
            let s = mean_diag / n_active as f64;
            for &i in &idx {
                for &j in &idx {
                    dense[(i, j)] += s;
                }
            }
        }
        let dense: DMatrix<f64> = 0.5 * (&dense + dense.transpose());
        let coarse = dense
            .cholesky()
            .ok_or_else(|| Error::SingularSystem("coarse operator is not positive definite".into()))?;
        Ok(Self { levels, coarse })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn operator(&self) -> &Csr {
        &self.levels[0].a
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.cycle(0, r)
    }

    fn chebyshev(&self, lvl: &Level, b: &[f64], x: &mut [f64]) {
        let n = b.len();
        let hi = lvl.lambda_max;
        let lo = hi / CHEB_RATIO;
        let theta = 0.5 * (hi + lo);
        let delta = 0.5 * (hi - lo);
        let sigma = theta / delta;
        let mut rho = 1.0 / sigma;
        let mut r = lvl.a.mul(x);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut z = vec![0.0; n];
        apply_blocks(&lvl.blocks, &r, &mut z);
        let mut d: Vec<f64> = z.iter().map(|v| v / theta).collect();
        let mut ad = vec![0.0; n];
        for _ in 1..CHEB_DEGREE {
            axpy(1.0, &d, x);
            lvl.a.matvec(&d, &mut ad);
            axpy(-1.0, &ad, &mut r);
            let rho_new = 1.0 / (2.0 * sigma - rho);
            apply_blocks(&lvl.blocks, &r, &mut z);
            for i in 0..n {
                d[i] = rho_new * rho * d[i] + 2.0 * rho_new / delta * z[i];
            }
            rho = rho_new;
        }
        axpy(1.0, &d, x);
    }

    fn cycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        let lvl = &self.levels[l];
        let (Some(p), Some(r)) = (&lvl.p, &lvl.r) else {
            let v = nalgebra::DVector::from_column_slice(b);
            return self.coarse.solve(&v).as_slice().to_vec();
        };
        let mut x = vec![0.0; b.len()];
        self.chebyshev(lvl, b, &mut x);
        let mut res = lvl.a.mul(&x);
        for i in 0..b.len() {
            res[i] = b[i] - res[i];
        }
        let xc = self.cycle(l + 1, &r.mul(&res));
        axpy(1.0, &p.mul(&xc), &mut x);
        self.chebyshev(lvl, b, &mut x);
        x
    }
}

/// Puts a unit diagonal on rows of nodes that carry no stiffness.
pub fn pin_inactive(a: Csr, active: &[bool]) -> Csr {
    if active.iter().all(|&x| x) {
        return a;
    }
    let rows = (0..a.n_rows)
        .map(|i| {
            if active[i / 3] {
                let (c, v) = a.row(i);
                c.iter().copied().zip(v.iter().copied()).collect()
            } else {
                vec![(i, 1.0)]
            }
        })
        .collect();
    Csr::from_rows(a.n_cols, rows)
}
