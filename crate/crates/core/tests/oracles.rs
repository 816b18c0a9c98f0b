mod common;

use approx::assert_abs_diff_eq;
use common::oracle;
use degen_fv::diagnostics;
use degen_fv::solver::{solve_step, SolverConfig};
use degen_fv::{CellField, FaceGeometry, FluxScheme, Mesh, Preset, Problem};

#[test]
fn every_diagnostic_matches_resummation() {
    for (name, lib, ora) in oracle::comparisons() {
        assert!((lib - ora).abs() <= 1e-13, "{name}: library {lib} vs oracle {ora}");
    }
}

#[test]
fn oracle_trajectory_is_not_trivial() {
    // Guards against an oracle that agrees only because everything is zero.
    assert!(oracle::weak_bv() > 0.01);
    assert!(oracle::l2h1() > 1e-4);
    assert!(oracle::space_translate(0.2) > 0.0);
    assert!(oracle::time_translate(0.15) > 0.0);
    assert!(oracle::continuous(0.3, 0.25).abs() > 1e-3);
}

#[test]
fn hand_solved_heat_system() {
    let mesh = Mesh::interval(0.0, 1.0, 2, 1.0).unwrap();
    let scheme = FluxScheme::godunov(&Problem::preset(Preset::Heat));
    let old = CellField::new(&mesh, vec![1.0, 0.0], 0, 0.0).unwrap();
    let (u, report) = solve_step(&mesh, &scheme, &old, 0.25, &SolverConfig::default()).unwrap();
    let want = oracle::heat_two_cell_solution();
    assert_abs_diff_eq!(u.values[0], want[0], epsilon = 1e-12);
    assert_abs_diff_eq!(u.values[1], want[1], epsilon = 1e-12);
    assert_eq!(report.newton_iterations, 1);
}

#[test]
fn weak_bv_single_face_example() {
    // Two cells, one step of length 1, values (0.8, 0.2): 0.09 + 0.09.
    let mesh = std::sync::Arc::new(Mesh::interval(0.0, 2.0, 2, 1.0).unwrap());
    let traj = degen_fv::Trajectory::from_levels(mesh, 1.0, vec![vec![0.5, 0.5], vec![0.8, 0.2]]).unwrap();
    let scheme = FluxScheme::godunov(&Problem::preset(Preset::BurgersHyperbolic));
    assert_abs_diff_eq!(diagnostics::weak_bv_functional(&traj, &scheme).unwrap(), 0.18, epsilon = 1e-14);
}

#[test]
fn godunov_entropy_flux_example() {
    let scheme = FluxScheme::godunov(&Problem::preset(Preset::BurgersHyperbolic));
    let e1 = FaceGeometry::new(1.0, [1.0, 0.0]);
    let full = scheme.entropy_face_flux(e1, 0.8, 0.2, 0.5, degen_fv::EntropyKind::Full).unwrap();
    let a = scheme.face_flux(e1, 0.8, 0.5).unwrap();
    let b = scheme.face_flux(e1, 0.5, 0.2).unwrap();
    assert_abs_diff_eq!(a, 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(b, 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(full, 0.0, epsilon = 1e-15);
}

