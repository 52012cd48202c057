use super::*;
use crate::cell::{Axis, CellSpec, InclusionLayer, Ply};
use crate::material::{iso_to_tensor, IsotropicMaterial};
use crate::mesh::{generate_mesh, periodic_pairs, HexMesh};
use crate::mode::{MacroMode, Order, Pair};

pub(crate) fn table(entries: &[(&str, f64, f64)]) -> MaterialTable {
    entries
        .iter()
        .map(|&(n, e, nu)| (n.to_string(), iso_to_tensor(&IsotropicMaterial::new(n, e, nu).unwrap()).unwrap()))
        .collect()
}

fn tight() -> SolverOptions {
    SolverOptions {
        tolerance: 1e-11,
        ..Default::default()
    }
}

/// Stress at every Gauss point: `(position, σ)` in engineering Voigt order.
fn gauss_stresses(sys: &CellSystem, z: &[[f64; 3]]) -> Vec<([f64; 3], [f64; 6])> {
    (0..sys.mesh().n_elements())
        .filter_map(|e| Some((sys.gauss_positions(e), sys.gauss_stresses(e, z)?)))
        .flat_map(|(ys, ss)| ys.into_iter().zip(ss).map(|(y, s)| (y, [s[0], s[1], s[2], s[3], s[4], s[5]])))
        .collect()
}

fn fiber_cell() -> CellSpec {
    let mut s = CellSpec::homogeneous(1.1, 1.3, 1.2, "matrix");
    s.inclusions.push(InclusionLayer::fiber(Axis::Y2, 0.05, 0.4, 0.55, "fiber"));
    s
}

fn fiber_materials() -> MaterialTable {
    table(&[("matrix", 3.5, 0.35), ("fiber", 40.0, 0.22)])
}

#[test]
fn homogeneous_tension_is_exact() {
    let (e, nu) = (2.0, 0.3);
    let mesh = generate_mesh(&CellSpec::homogeneous(1.0, 1.5, 0.8, "m"), [3, 4, 4]).unwrap();
    let sys = CellSystem::new(&mesh, &table(&[("m", e, nu)])).unwrap();
    let f = sys.solve(MacroMode::new(Pair::P11, Order::Membrane), &tight()).unwrap();
    let q11 = e / (1.0 - nu * nu);
    for (_, s) in gauss_stresses(&sys, &f.displacement) {
        assert!((s[0] - q11).abs() < 1e-9, "σ11 = {}", s[0]);
        assert!((s[1] - nu * q11).abs() < 1e-9);
        for c in [2, 3, 4, 5] {
            assert!(s[c].abs() < 1e-9, "σ[{c}] = {}", s[c]);
        }
    }
}

#[test]
fn homogeneous_bending_is_exact() {
    let (e, nu) = (1.0, 0.25);
    let mesh = generate_mesh(&CellSpec::homogeneous(1.0, 1.0, 1.0, "m"), [3, 3, 4]).unwrap();
    let sys = CellSystem::new(&mesh, &table(&[("m", e, nu)])).unwrap();
    let q11 = e / (1.0 - nu * nu);
    for pair in [Pair::P11, Pair::P22] {
        let f = sys.solve(MacroMode::new(pair, Order::Bending), &tight()).unwrap();
        let (a, b) = if pair == Pair::P11 { (0, 1) } else { (1, 0) };
        for (y, s) in gauss_stresses(&sys, &f.displacement) {
            assert!((s[a] - q11 * y[2]).abs() < 1e-8, "{y:?}: {}", s[a]);
            assert!((s[b] - nu * q11 * y[2]).abs() < 1e-8);
            for c in [2, 3, 4, 5] {
                assert!(s[c].abs() < 1e-8, "σ[{c}] = {}", s[c]);
            }
        }
    }
}

#[test]
fn two_material_laminate_membrane_is_piecewise_constant() {
    let spec = CellSpec::laminate(
        1.0,
        1.0,
        vec![
            Ply { thickness: 0.4, material: "soft".into() },
            Ply { thickness: 0.6, material: "hard".into() },
        ],
    );
    let mesh = generate_mesh(&spec, [3, 3, 5]).unwrap();
    let mats = table(&[("soft", 1.0, 0.3), ("hard", 10.0, 0.2)]);
    let sys = CellSystem::new(&mesh, &mats).unwrap();
    let f = sys.solve(MacroMode::new(Pair::P12, Order::Membrane), &tight()).unwrap();
    let top = mesh.grid(2)[0] + 0.4;
    for (y, s) in gauss_stresses(&sys, &f.displacement) {
        let (e, nu) = if y[2] < top { (1.0, 0.3) } else { (10.0, 0.2) };
        let g = e / (2.0 * (1.0 + nu));
        assert!((s[5] - g).abs() < 1e-8, "σ12 = {} at {y:?}", s[5]);
    }
}

fn fiber_solution(mode: MacroMode) -> (HexMesh, CorrectorField) {
    let mesh = generate_mesh(&fiber_cell(), [8, 6, 10]).unwrap();
    let f = solve_pcp(&mesh, &fiber_materials(), mode, &tight()).unwrap();
    (mesh, f)
}

#[test]
fn jumps_match_the_affine_field() {
    for mode in [
        MacroMode::new(Pair::P11, Order::Bending).with_magnitude(1.7),
        MacroMode::new(Pair::P12, Order::Membrane),
    ] {
        let (mesh, f) = fiber_solution(mode);
        let xi = unit_strain_field(mode);
        for axis in [1, 2] {
            let period = if axis == 1 { 1.1 } else { 1.3 };
            for (m, s) in periodic_pairs(&mesh, axis).unwrap().pairs {
                let j = xi.jump(axis - 1, period, mesh.nodes()[m]);
                for c in 0..3 {
                    let got = f.displacement[s][c] - f.displacement[m][c];
                    assert!((got - mode.magnitude * j[c]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn solution_has_zero_solid_mean_and_periodic_corrector() {
    let mode = MacroMode::new(Pair::P22, Order::Bending);
    let (mesh, f) = fiber_solution(mode);
    let sys = CellSystem::new(&mesh, &fiber_materials()).unwrap();
    let mean = sys.solid_mean(&f.displacement);
    assert!(mean.iter().all(|v| v.abs() < 1e-12), "{mean:?}");
    let n = recover_n(&f, &mesh).unwrap();
    for axis in [1, 2] {
        for (m, s) in periodic_pairs(&mesh, axis).unwrap().pairs {
            for c in 0..3 {
                assert!((n[m][c] - n[s][c]).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn equilibrium_and_free_faces() {
    let (mesh, f) = fiber_solution(MacroMode::new(Pair::P11, Order::Membrane));
    let sys = CellSystem::new(&mesh, &fiber_materials()).unwrap();
    let forces = sys.nodal_forces(&f.displacement);
    let scale = forces.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let [n1, n2, n3] = mesh.resolution();
    // Masters gather the periodic copies; their total vanishes everywhere,
    // including on the traction-free faces.
    let mut gathered = vec![[0.0; 3]; mesh.n_master_nodes()];
    for (n, fv) in forces.iter().enumerate() {
        for c in 0..3 {
            gathered[mesh.master_of(n)][c] += fv[c];
        }
    }
    let worst = gathered.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-8 * scale, "{worst} vs {scale}");
    // Nodes off the lateral faces carry no force on their own.
    for k in 0..=n3 {
        for j in 1..n2 {
            for i in 1..n1 {
                let fv = forces[mesh.node_id(i, j, k)];
                assert!(fv.iter().all(|v| v.abs() < 1e-8 * scale));
            }
        }
    }
}

#[test]
fn linear_in_magnitude() {
    let mesh = generate_mesh(&fiber_cell(), [6, 4, 8]).unwrap();
    let sys = CellSystem::new(&mesh, &fiber_materials()).unwrap();
    let mode = MacroMode::new(Pair::P12, Order::Bending);
    let a = sys.solve(mode, &tight()).unwrap();
    let b = sys.solve(mode.with_magnitude(-2.5), &tight()).unwrap();
    for (x, y) in a.displacement.iter().zip(&b.displacement) {
        for c in 0..3 {
            assert!((y[c] + 2.5 * x[c]).abs() < 1e-8);
        }
    }
    let na = recover_n(&a, &mesh).unwrap();
    let nb = recover_n(&b, &mesh).unwrap();
    for (x, y) in na.iter().zip(&nb) {
        for c in 0..3 {
            assert!((x[c] - y[c]).abs() < 1e-8);
        }
    }
}

#[test]
fn zero_magnitude_gives_zero_field() {
    let mesh = generate_mesh(&fiber_cell(), [4, 4, 6]).unwrap();
    let f = solve_pcp(&mesh, &fiber_materials(), MacroMode::new(Pair::P11, Order::Membrane).with_magnitude(0.0), &tight()).unwrap();
    assert!(f.displacement.iter().flatten().all(|&v| v == 0.0));
    assert!(matches!(recover_n(&f, &mesh), Err(crate::Error::ZeroMagnitude)));
}

#[test]
fn channels_leave_void_nodes_alone() {
    let mut s = CellSpec::homogeneous(1.1, 1.1, 1.2, "matrix");
    s.inclusions.push(InclusionLayer::channel(Axis::Y1, 0.0, 0.4, 0.55));
    let mesh = generate_mesh(&s, [8, 8, 10]).unwrap();
    let mats = table(&[("matrix", 3.5, 0.35)]);
    let sys = CellSystem::new(&mesh, &mats).unwrap();
    let f = sys.solve(MacroMode::new(Pair::P22, Order::Membrane), &tight()).unwrap();
    assert!(f.displacement.iter().flatten().all(|v| v.is_finite()));
    assert!(f.report.iterations > 0);
}

#[test]
fn missing_material_is_reported() {
    let mesh = generate_mesh(&fiber_cell(), [4, 4, 6]).unwrap();
    let err = CellSystem::new(&mesh, &table(&[("matrix", 1.0, 0.3)])).err().unwrap();
    assert!(matches!(err, crate::Error::MissingMaterial(ref m) if m == "fiber"));
}

#[test]
fn operator_is_symmetric() {
    let mesh = generate_mesh(&fiber_cell(), [4, 3, 6]).unwrap();
    let sys = CellSystem::new(&mesh, &fiber_materials()).unwrap();
    assert!(sys.operator().is_symmetric(1e-12));
}
