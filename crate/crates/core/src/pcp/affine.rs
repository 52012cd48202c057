use crate::mode::{MacroMode, Order};

/// Closed-form displacement `ξ^{αβν}` whose symmetric gradient is
/// `y₃^ν` times the unit in-plane strain `(e_α ⊗ e_β + e_β ⊗ e_α)/2`.
///
/// For `ν = 0` it is the symmetric linear field `(δ_kα y_β + δ_kβ y_α)/2`; for
/// `ν = 1` the in-plane components gain a factor `y₃` and the deflection is
/// `ξ₃ = −y_α y_β / 2`, so the transverse shears cancel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineField {
    pub mode: MacroMode,
}

pub fn unit_strain_field(mode: MacroMode) -> AffineField {
    AffineField {
        mode: MacroMode { magnitude: 1.0, ..mode },
    }
}

impl AffineField {
    pub fn eval(&self, y: [f64; 3]) -> [f64; 3] {
        let (a, b) = self.mode.pair.indices();
        let mut u = [0.0; 3];
        u[a] += 0.5 * y[b];
        u[b] += 0.5 * y[a];
        if self.mode.order == Order::Bending {
            u[0] *= y[2];
            u[1] *= y[2];
            u[2] = -0.5 * y[a] * y[b];
        }
        u
    }

    /// Symmetric gradient `e_kl(ξ)` at `y`.
    pub fn strain(&self, y: [f64; 3]) -> [[f64; 3]; 3] {
        let (a, b) = self.mode.pair.indices();
        let scale = match self.mode.order {
            Order::Membrane => 1.0,
            Order::Bending => y[2],
        };
        let mut e = [[0.0; 3]; 3];
        e[a][b] += 0.5 * scale;
        e[b][a] += 0.5 * scale;
        e
    }

    /// `ξ(y + h e_axis) − ξ(y)` for a master point `y` on `Γ_axis`.
    ///
    /// Constant over the face for membrane modes; affine in the face
    /// coordinates for bending modes.
    pub fn jump(&self, axis: usize, period: f64, y: [f64; 3]) -> [f64; 3] {
        let mut shifted = y;
        shifted[axis] += period;
        let (p, q) = (self.eval(shifted), self.eval(y));
        [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::Pair;
    use proptest::prelude::*;

    fn field(pair: Pair, order: Order) -> AffineField {
        unit_strain_field(MacroMode::new(pair, order))
    }

    #[test]
    fn tension_11() {
        let f = field(Pair::P11, Order::Membrane);
        assert_eq!(f.eval([0.3, 0.7, -0.2]), [0.3, 0.0, 0.0]);
        assert_eq!(f.jump(0, 1.1, [0.0, 0.4, 0.1]), [1.1, 0.0, 0.0]);
        assert_eq!(f.jump(1, 3.0, [0.2, 0.0, 0.1]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn shear_12_is_symmetric() {
        let f = field(Pair::P12, Order::Membrane);
        assert_eq!(f.eval([0.4, 0.6, 0.0]), [0.3, 0.2, 0.0]);
        assert_eq!(f.jump(0, 1.1, [0.0, 0.6, 0.0]), [0.0, 0.55, 0.0]);
        assert_eq!(f.jump(1, 3.0, [0.4, 0.0, 0.0]), [1.5, 0.0, 0.0]);
    }

    #[test]
    fn bending_11_shape_and_jump() {
        let f = field(Pair::P11, Order::Bending);
        let y = [0.5, 0.2, 0.3];
        assert_eq!(f.eval(y), [0.15, 0.0, -0.125]);
        // ξ₃ jump across Γ₁ at y₁ = 0 is −h₁²/2; ξ₁ jump is h₁·y₃.
        let j = f.jump(0, 1.1, [0.0, 0.2, 0.3]);
        assert!((j[0] - 0.33).abs() < 1e-15);
        assert!((j[2] + 0.605).abs() < 1e-15);
    }

    fn fd_strain(f: &AffineField, y: [f64; 3]) -> [[f64; 3]; 3] {
        let h = 1e-5;
        let mut g = [[0.0; 3]; 3];
        for l in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[l] += h;
            ym[l] -= h;
            let (up, um) = (f.eval(yp), f.eval(ym));
            for k in 0..3 {
                g[k][l] = (up[k] - um[k]) / (2.0 * h);
            }
        }
        let mut e = [[0.0; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                e[k][l] = 0.5 * (g[k][l] + g[l][k]);
            }
        }
        e
    }

    proptest! {
        #[test]
        fn strain_matches_finite_differences(
            y in prop::array::uniform3(-2.0f64..2.0),
            p in 0usize..3,
            nu in 0usize..2,
        ) {
            let f = field(Pair::ALL[p], Order::from_index(nu).unwrap());
            let fd = fd_strain(&f, y);
            let an = f.strain(y);
            for k in 0..3 {
                for l in 0..3 {
                    prop_assert!((fd[k][l] - an[k][l]).abs() < 1e-8);
                }
            }
            // The unit strain is y₃^ν at (αβ), zero elsewhere (transverse shear included).
            let (a, b) = Pair::ALL[p].indices();
            let expect = if nu == 0 { 1.0 } else { y[2] };
            let entry = if a == b { an[a][a] } else { an[a][b] + an[b][a] };
            prop_assert!((entry - expect).abs() < 1e-12);
            prop_assert!(an[0][2].abs() < 1e-15 && an[1][2].abs() < 1e-15 && an[2][2].abs() < 1e-15);
        }

        #[test]
        fn membrane_jumps_are_constant(z in -1.0f64..1.0, t in 0.0f64..3.0, p in 0usize..3) {
            let f = field(Pair::ALL[p], Order::Membrane);
            let j0 = f.jump(0, 1.1, [0.0, 0.0, 0.0]);
            let j = f.jump(0, 1.1, [0.0, t, z]);
            for c in 0..3 {
                prop_assert!((j[c] - j0[c]).abs() < 1e-14);
            }
        }
    }
}
