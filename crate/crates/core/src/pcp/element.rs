//! Eight-node box element with condensed incompatible bending modes.
//!
//! The compatible trilinear field is enriched with the internal modes
//! `1 − s²`, `1 − t²`, `1 − r²` per displacement component. They are
//! condensed out at element level, so the assembled element is an ordinary
//! 24-dof hexahedron. On a box the enrichment still passes the constant-strain
//! patch test and reproduces pure bending exactly, which the bending cell
//! problems rely on.

use nalgebra::{Matrix6, SMatrix};

use crate::mesh::LOCAL_OFFSETS;

pub type Mat24 = SMatrix<f64, 24, 24>;
pub type StrainOp = SMatrix<f64, 6, 24>;

const GAUSS: f64 = 0.577_350_269_189_625_8;

/// 2×2×2 Gauss points in natural coordinates.
pub fn gauss_points() -> [[f64; 3]; 8] {
    LOCAL_OFFSETS.map(|o| o.map(|b| if b == 0 { -GAUSS } else { GAUSS }))
}

#[derive(Debug, Clone)]
pub struct ElementMatrices {
    /// Condensed stiffness on the 24 nodal dofs (node-major, component-minor).
    pub stiffness: Mat24,
    /// Nodal dofs to engineering strain at each Gauss point, enrichment included.
    pub strain_ops: [StrainOp; 8],
    /// Quadrature weight times Jacobian determinant.
    pub weight: f64,
}

fn nodal_gradients(natural: [f64; 3], size: [f64; 3]) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for (a, off) in LOCAL_OFFSETS.iter().enumerate() {
        let s = off.map(|b| if b == 0 { -1.0 } else { 1.0 });
        let f = [0, 1, 2].map(|d| 1.0 + s[d] * natural[d]);
        for d in 0..3 {
            let mut v = 0.125 * s[d];
            for e in 0..3 {
                if e != d {
                    v *= f[e];
                }
            }
            g[a][d] = v * 2.0 / size[d];
        }
    }
    g
}

/// Fills the strain rows for one scalar basis gradient acting on component `c`.
fn put_strain_column<const N: usize>(m: &mut SMatrix<f64, 6, N>, col: usize, c: usize, grad: [f64; 3]) {
    match c {
        0 => {
            m[(0, col)] = grad[0];
            m[(4, col)] = grad[2];
            m[(5, col)] = grad[1];
        }
        1 => {
            m[(1, col)] = grad[1];
            m[(3, col)] = grad[2];
            m[(5, col)] = grad[0];
        }
        _ => {
            m[(2, col)] = grad[2];
            m[(3, col)] = grad[1];
            m[(4, col)] = grad[0];
        }
    }
}

pub fn compatible_strain_op(natural: [f64; 3], size: [f64; 3]) -> StrainOp {
    let g = nodal_gradients(natural, size);
    let mut b = StrainOp::zeros();
    for a in 0..8 {
        for c in 0..3 {
            put_strain_column(&mut b, 3 * a + c, c, g[a]);
        }
    }
    b
}

fn enrichment_op(natural: [f64; 3], size: [f64; 3]) -> SMatrix<f64, 6, 9> {
    let mut g = SMatrix::<f64, 6, 9>::zeros();
    for m in 0..3 {
        let mut grad = [0.0; 3];
        grad[m] = -2.0 * natural[m] * 2.0 / size[m];
        for c in 0..3 {
            put_strain_column(&mut g, 3 * m + c, c, grad);
        }
    }
    g
}

/// Element matrices of an axis-aligned box with edge lengths `size`.
pub fn box_element(size: [f64; 3], d: &Matrix6<f64>) -> ElementMatrices {
    let weight = size[0] * size[1] * size[2] / 8.0;
    let mut kuu = Mat24::zeros();
    let mut kua = SMatrix::<f64, 24, 9>::zeros();
    let mut kaa = SMatrix::<f64, 9, 9>::zeros();
    let pts = gauss_points();
    let mut bs = [StrainOp::zeros(); 8];
    let mut gs = [SMatrix::<f64, 6, 9>::zeros(); 8];
    for (q, p) in pts.iter().enumerate() {
        let b = compatible_strain_op(*p, size);
        let g = enrichment_op(*p, size);
        let db = d * b;
        let dg = d * g;
        kuu += b.transpose() * db * weight;
        kua += db.transpose() * g * weight;
        kaa += g.transpose() * dg * weight;
        bs[q] = b;
        gs[q] = g;
    }
    let kaa_inv = kaa
        .cholesky()
        .expect("enrichment block is positive definite for a positive definite material")
        .inverse();
    // Internal amplitudes α = −K_aa⁻¹ K_au u.
    let recovery = -(kaa_inv * kua.transpose());
    let stiffness = kuu + kua * recovery;
    let stiffness = 0.5 * (stiffness + stiffness.transpose());
    let strain_ops = std::array::from_fn(|q| bs[q] + gs[q] * recovery);
    ElementMatrices {
        stiffness,
        strain_ops,
        weight,
    }
}
