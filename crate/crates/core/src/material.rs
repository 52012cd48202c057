//! Isotropic materials and the rank-4 elasticity tensor.
//!
//! Tensors are stored as 6×6 matrices in Voigt order
//! `[11, 22, 33, 23, 13, 12]` acting on engineering strains
//! (`γ_ij = 2 e_ij` for the shear rows).

use nalgebra::{Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voigt position of the index pair `(i, j)` with zero-based indices.
pub const fn voigt_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) | (2, 1) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicMaterial {
    pub name: String,
    /// Young's modulus (GPa).
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl IsotropicMaterial {
    pub fn new(name: impl Into<String>, youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let m = Self {
            name: name.into(),
            youngs_modulus,
            poisson_ratio,
        };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        let fail = |reason: &str| Error::InvalidMaterial {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if !(self.youngs_modulus > 0.0) || !self.youngs_modulus.is_finite() {
            return Err(fail("Young's modulus must be positive"));
        }
        if !(self.poisson_ratio > -1.0) {
            return Err(fail("Poisson's ratio must exceed -1"));
        }
        if !(self.poisson_ratio < 0.5) {
            return Err(fail("Poisson's ratio must be below 0.5 (incompressible limit)"));
        }
        Ok(())
    }

    /// Lamé parameters `(λ, μ)`.
    pub fn lame(&self) -> (f64, f64) {
        let e = self.youngs_modulus;
        let nu = self.poisson_ratio;
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        (lambda, mu)
    }

    /// Reduced (plane-stress) stiffnesses `(Q11, Q12, Q66)` of a thin lamina.
    pub fn plane_stress(&self) -> (f64, f64, f64) {
        let e = self.youngs_modulus;
        let nu = self.poisson_ratio;
        let q11 = e / (1.0 - nu * nu);
        (q11, nu * q11, e / (2.0 * (1.0 + nu)))
    }
}

/// Rank-4 stiffness `a_ijkl` with minor and major symmetries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityTensor {
    voigt: Matrix6<f64>,
}

impl ElasticityTensor {
    /// Builds a tensor from a Voigt matrix, checking symmetry and positive definiteness.
    pub fn from_voigt(voigt: Matrix6<f64>) -> Result<Self> {
        let t = Self { voigt };
        if !t.is_symmetric() {
            return Err(Error::InvalidMaterial {
                name: "<voigt>".into(),
                reason: "stiffness matrix is not symmetric".into(),
            });
        }
        if t.min_eigenvalue() <= 0.0 {
            return Err(Error::InvalidMaterial {
                name: "<voigt>".into(),
                reason: "stiffness matrix is not positive definite".into(),
            });
        }
        Ok(t)
    }

    pub fn voigt(&self) -> &Matrix6<f64> {
        &self.voigt
    }

    /// `a_ijkl` with zero-based indices.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.voigt[(voigt_index(i, j), voigt_index(k, l))]
    }

    pub fn is_symmetric(&self) -> bool {
        self.voigt == self.voigt.transpose()
    }

    /// Smallest eigenvalue of the Voigt matrix on tensorial strains.
    ///
    /// The engineering-shear rows are rescaled so the spectrum is that of the
    /// tensor acting on symmetric strains.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut m = self.voigt;
        let s = std::f64::consts::SQRT_2;
        for r in 0..6 {
            for c in 0..6 {
                let fr = if r >= 3 { s } else { 1.0 };
                let fc = if c >= 3 { s } else { 1.0 };
                m[(r, c)] *= fr * fc;
            }
        }
        SymmetricEigen::new(m).eigenvalues.min()
    }

    /// Stress from an engineering strain vector.
    pub fn stress(&self, strain: &nalgebra::Vector6<f64>) -> nalgebra::Vector6<f64> {
        self.voigt * strain
    }
}

/// Isotropic stiffness from Young's modulus and Poisson's ratio.
pub fn iso_to_tensor(m: &IsotropicMaterial) -> Result<ElasticityTensor> {
    m.check()?;
    let (lambda, mu) = m.lame();
    let mut c = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = lambda;
        }
        c[(i, i)] = lambda + 2.0 * mu;
        c[(i + 3, i + 3)] = mu;
    }
    Ok(ElasticityTensor { voigt: c })
}

/// Effective stiffness of a fine laminate of `c1` (volume fraction `f1`) and
/// `c2` with unit normal `n`: strains jump by `sym(a ⊗ n)` across the
/// interface, tractions are continuous.
pub fn laminate_mix(c1: &Matrix6<f64>, c2: &Matrix6<f64>, f1: f64, n: [f64; 3]) -> Matrix6<f64> {
    let f2 = 1.0 - f1;
    let voigt = f1 * c1 + f2 * c2;
    if f1 <= 0.0 || f2 <= 0.0 {
        return voigt;
    }
    let nm = nalgebra::Matrix6x3::new(
        n[0], 0.0, 0.0, //
        0.0, n[1], 0.0, //
        0.0, 0.0, n[2], //
        0.0, n[2], n[1], //
        n[2], 0.0, n[0], //
        n[1], n[0], 0.0,
    );
    let m = nm.transpose() * (f2 * c1 + f1 * c2) * nm;
    let dc = c1 - c2;
    let inv = m.try_inverse().expect("acoustic tensor of a positive definite stiffness is invertible");
    voigt - f1 * f2 * dc * nm * inv * nm.transpose() * dc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mat(e: f64, nu: f64) -> IsotropicMaterial {
        IsotropicMaterial::new("m", e, nu).unwrap()
    }

    #[test]
    fn unit_modulus_zero_poisson() {
        let t = iso_to_tensor(&mat(1.0, 0.0)).unwrap();
        assert_eq!(t.component(0, 0, 0, 0), 1.0);
        assert_eq!(t.component(0, 0, 1, 1), 0.0);
        assert_eq!(t.component(0, 1, 0, 1), 0.5);
    }

    #[test]
    fn epoxy_and_carbon_lame_values() {
        // λ = Eν/((1+ν)(1-2ν)), μ = E/(2(1+ν)) evaluated by hand:
        // epoxy: 0.72/(1.36*0.28) = 1.890756..., 2/2.72 = 0.735294...
        let (l, m) = mat(2.0, 0.36).lame();
        assert_relative_eq!(l, 0.72 / 0.3808, max_relative = 1e-14);
        assert_relative_eq!(l, 1.89076, max_relative = 1e-5);
        assert_relative_eq!(m, 0.73529, max_relative = 1e-5);
        let t = iso_to_tensor(&mat(2.0, 0.36)).unwrap();
        assert_relative_eq!(t.component(0, 0, 0, 0), 3.36134, max_relative = 1e-5);

        // carbon: 51/0.52 = 98.0769..., 170/2.6 = 65.3846...
        let (l, m) = mat(170.0, 0.3).lame();
        assert_relative_eq!(l, 98.0769, max_relative = 1e-5);
        assert_relative_eq!(m, 65.3846, max_relative = 1e-5);
        let t = iso_to_tensor(&mat(170.0, 0.3)).unwrap();
        assert_relative_eq!(t.component(2, 2, 2, 2), 228.846, max_relative = 1e-5);
    }

    #[test]
    fn rejects_incompressible_and_bad_modulus() {
        assert!(IsotropicMaterial::new("x", 1.0, 0.5).is_err());
        assert!(IsotropicMaterial::new("x", 1.0, 0.7).is_err());
        assert!(IsotropicMaterial::new("x", 0.0, 0.2).is_err());
        assert!(IsotropicMaterial::new("x", 1.0, -1.0).is_err());
        let raw = IsotropicMaterial {
            name: "raw".into(),
            youngs_modulus: 1.0,
            poisson_ratio: 0.5,
        };
        assert!(iso_to_tensor(&raw).is_err());
    }

    #[test]
    fn index_symmetries() {
        let t = iso_to_tensor(&mat(3.0, 0.25)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let a = t.component(i, j, k, l);
                        assert_eq!(a, t.component(j, i, k, l));
                        assert_eq!(a, t.component(i, j, l, k));
                        assert_eq!(a, t.component(k, l, i, j));
                    }
                }
            }
        }
    }

    #[test]
    fn laminate_matches_series_and_parallel_rules() {
        // Zero Poisson ratio decouples the directions: normal stiffness is the
        // harmonic mean, in-plane stiffness the arithmetic mean.
        let c1 = *iso_to_tensor(&mat(10.0, 0.0)).unwrap().voigt();
        let c2 = *iso_to_tensor(&mat(1.0, 0.0)).unwrap().voigt();
        let l = laminate_mix(&c1, &c2, 0.25, [0.0, 0.0, 1.0]);
        assert_relative_eq!(l[(2, 2)], 1.0 / (0.25 / 10.0 + 0.75), max_relative = 1e-13);
        assert_relative_eq!(l[(0, 0)], 0.25 * 10.0 + 0.75, max_relative = 1e-13);
        assert_relative_eq!(l[(3, 3)], 1.0 / (0.25 / 5.0 + 0.75 / 0.5), max_relative = 1e-13);
        assert_relative_eq!(l[(5, 5)], 0.25 * 5.0 + 0.75 * 0.5, max_relative = 1e-13);
        assert_eq!(laminate_mix(&c1, &c2, 1.0, [1.0, 0.0, 0.0]), c1);
    }

    proptest! {
        #[test]
        fn laminate_lies_between_bounds(f in 0.0f64..1.0, t in 0.0f64..6.3, nu1 in 0.0f64..0.45, nu2 in 0.0f64..0.45) {
            let c1 = *iso_to_tensor(&mat(170.0, nu1)).unwrap().voigt();
            let c2 = *iso_to_tensor(&mat(2.0, nu2)).unwrap().voigt();
            let l = laminate_mix(&c1, &c2, f, [t.cos(), 0.0, t.sin()]);
            let voigt = f * c1 + (1.0 - f) * c2;
            let reuss = (f * c1.try_inverse().unwrap() + (1.0 - f) * c2.try_inverse().unwrap()).try_inverse().unwrap();
            prop_assert!((l - l.transpose()).abs().max() < 1e-9 * voigt.abs().max());
            prop_assert!(SymmetricEigen::new(voigt - l).eigenvalues.min() > -1e-9 * voigt.abs().max());
            prop_assert!(SymmetricEigen::new(l - reuss).eigenvalues.min() > -1e-9 * voigt.abs().max());
        }

        #[test]
        fn iso_tensor_is_symmetric_positive_definite(e in 1e-3f64..1e3, nu in -0.99f64..0.499) {
            let t = iso_to_tensor(&mat(e, nu)).unwrap();
            prop_assert!(t.is_symmetric());
            prop_assert!(t.min_eigenvalue() > 0.0);
            prop_assert!(ElasticityTensor::from_voigt(*t.voigt()).is_ok());
        }
    }
}
