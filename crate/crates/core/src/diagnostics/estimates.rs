use crate::error::Result;
use crate::mesh::FaceKind;
use crate::numflux::{FaceGeometry, FluxScheme};
use crate::problem::Problem;
use crate::solver::Trajectory;

/// Grid size for the inner maximization of the weak BV functional.
pub const WEAK_BV_GRID: usize = 64;

/// Global min and max over all cells and levels.
pub fn linf_bounds(traj: &Trajectory) -> (f64, f64) {
    traj.fields
        .iter()
        .flat_map(|f| &f.values)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// `Σ_K m(K) u_K^n` for every level.
pub fn mass_series(traj: &Trajectory) -> Vec<f64> {
    traj.fields
        .iter()
        .map(|f| traj.mesh.cells().iter().map(|c| c.measure * f.values[c.id]).sum())
        .collect()
}

/// Largest deviation of the mass from its initial value.
pub fn mass_drift(traj: &Trajectory) -> f64 {
    let m = mass_series(traj);
    m.iter().fold(0.0, |a, &x| a.max((x - m[0]).abs()))
}

/// Weak BV functional
/// `Σ_n δt Σ_σ max_{u_L≤c≤d≤u_K} (F(d,c) - F(d,d)) + max_{u_L≤c≤d≤u_K} (F(d,c) - F(c,c))`,
/// with `K` the cell carrying the larger value at level `n+1` and the
/// normal oriented from `K` to `L`.
pub fn weak_bv_functional(traj: &Trajectory, scheme: &FluxScheme) -> Result<f64> {
    let mesh = &*traj.mesh;
    let g = WEAK_BV_GRID;
    let mut total = 0.0;
    let mut f_dc = vec![0.0; g * g];
    let mut diag = vec![0.0; g];
    for field in &traj.fields[1..] {
        let u = &field.values;
        let mut level = 0.0;
        for face in mesh.interior_faces() {
            let FaceKind::Interior { left, right } = face.kind else { unreachable!() };
            let (ul, ur) = (u[left], u[right]);
            if ul == ur {
                continue;
            }
            let geom = FaceGeometry::new(face.measure, face.normal);
            let (hi, lo, geom) = if ul > ur { (ul, ur, geom) } else { (ur, ul, geom.flipped()) };
            let flux = scheme.prepare(geom);
            let s: Vec<f64> = (0..g).map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64).collect();
            for i in 0..g {
                diag[i] = flux.flux(s[i], s[i])?;
                for j in i + 1..g {
                    f_dc[i * g + j] = flux.flux(s[j], s[i])?;
                }
            }
            let (mut t1, mut t2) = (0.0f64, 0.0f64);
            for i in 0..g {
                for j in i + 1..g {
                    let v = f_dc[i * g + j];
                    t1 = t1.max(v - diag[j]);
                    t2 = t2.max(v - diag[i]);
                }
            }
            level += t1 + t2;
        }
        total += traj.dt * level;
    }
    Ok(total)
}

/// `½ Σ_n δt Σ_K Σ_{L∈N(K)} τ_{K|L} |φ(u_K^{n+1}) - φ(u_L^{n+1})|²`.
pub fn l2h1_functional(traj: &Trajectory, problem: &Problem) -> f64 {
    let mesh = &*traj.mesh;
    let mut total = 0.0;
    for field in &traj.fields[1..] {
        let phi: Vec<f64> = field.values.iter().map(|&v| problem.phi(v)).collect();
        let mut level = 0.0;
        for k in 0..mesh.n_cells() {
            for &f in mesh.cell_interior_faces(k) {
                let l = mesh.neighbour(f, k).unwrap();
                let face = mesh.face(f);
                let d = phi[k] - phi[l];
                level += face.measure / face.center_distance * d * d;
            }
        }
        total += 0.5 * traj.dt * level;
    }
    total
}
