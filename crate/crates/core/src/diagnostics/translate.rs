use crate::error::{invalid, Result};
use crate::mesh::{Mesh, Point};
use crate::problem::Problem;
use crate::solver::Trajectory;

/// Overlaps `(i, j, length)` of `[e_i, e_{i+1}]` with `[e_j - s, e_{j+1} - s]`.
fn axis_overlaps(edges: &[f64], s: f64) -> Vec<(usize, usize, f64)> {
    let n = edges.len() - 1;
    let mut out = Vec::new();
    let mut j0 = 0;
    for i in 0..n {
        let (a0, a1) = (edges[i], edges[i + 1]);
        while j0 < n && edges[j0 + 1] - s <= a0 {
            j0 += 1;
        }
        for j in j0..n {
            let (b0, b1) = (edges[j] - s, edges[j + 1] - s);
            if b0 >= a1 {
                break;
            }
            let len = a1.min(b1) - a0.max(b0);
            if len > 0.0 {
                out.push((i, j, len));
            }
        }
    }
    out
}

/// `∫_{Ω_η} |w(x + η) - w(x)|² dx` for a piecewise-constant `w`.
pub fn shifted_difference_sq(mesh: &Mesh, w: &[f64], eta: Point) -> f64 {
    let xs = axis_overlaps(mesh.edges(0), eta[0]);
    let ys = if mesh.dimension() == 1 { vec![(0, 0, 1.0)] } else { axis_overlaps(mesh.edges(1), eta[1]) };
    let nx = mesh.edges(0).len() - 1;
    let mut total = 0.0;
    for &(p, q, ly) in &ys {
        for &(i, j, lx) in &xs {
            let d = w[j + nx * q] - w[i + nx * p];
            total += lx * ly * d * d;
        }
    }
    total
}

/// Space translate functional `∫₀^T ∫_{Ω_η} |φ(u(t, x+η)) - φ(u(t, x))|² dx dt`.
pub fn space_translate_functional(traj: &Trajectory, problem: &Problem, eta: Point) -> Result<f64> {
    let mesh = &*traj.mesh;
    let len = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
    if !(len < mesh.domain_diameter()) {
        return Err(invalid(format!("|η| = {len} must be smaller than the domain diameter")));
    }
    if mesh.dimension() == 1 && eta[1] != 0.0 {
        return Err(invalid("η must have a zero second component in 1D"));
    }
    let mut total = 0.0;
    for field in &traj.fields[1..] {
        let phi: Vec<f64> = field.values.iter().map(|&v| problem.phi(v)).collect();
        total += traj.dt * shifted_difference_sq(mesh, &phi, eta);
    }
    Ok(total)
}

/// Time translate functional `∫₀^{T-τ} ∫_Ω |φ(u(t+τ, x)) - φ(u(t, x))|² dx dt`,
/// with `T` the final time of the trajectory.
pub fn time_translate_functional(traj: &Trajectory, problem: &Problem, tau: f64) -> Result<f64> {
    let t_end = traj.final_time();
    if !(tau > 0.0 && tau < t_end) {
        return Err(invalid(format!("τ = {tau} must lie in (0, {t_end})")));
    }
    let mesh = &*traj.mesh;
    let upper = t_end - tau;
    let mut breaks: Vec<f64> = vec![0.0, upper];
    for n in 0..=traj.steps() {
        let t = n as f64 * traj.dt;
        for b in [t, t - tau] {
            if b > 0.0 && b < upper {
                breaks.push(b);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let phi: Vec<Vec<f64>> = traj
        .fields
        .iter()
        .map(|f| f.values.iter().map(|&v| problem.phi(v)).collect())
        .collect();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let (a, b) = (traj.level_at(mid + tau), traj.level_at(mid));
        if a == b {
            continue;
        }
        let s: f64 = mesh
            .cells()
            .iter()
            .map(|c| c.measure * (phi[a][c.id] - phi[b][c.id]).powi(2))
            .sum();
        total += len * s;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlaps_cover_shifted_interval() {
        let e = [0.0, 0.25, 0.5, 1.0];
        let o = axis_overlaps(&e, 0.1);
        let total: f64 = o.iter().map(|x| x.2).sum();
        assert!((total - 0.9).abs() < 1e-15);
        assert!(o.iter().all(|&(i, j, _)| j == i || j == i + 1));
        let o = axis_overlaps(&e, -0.3);
        let total: f64 = o.iter().map(|x| x.2).sum();
        assert!((total - 0.7).abs() < 1e-15);
    }

    #[test]
    fn shift_of_step_field() {
        let mesh = Mesh::interval(0.0, 1.0, 4, 1.0).unwrap();
        let w = [0.0, 0.0, 1.0, 1.0];
        // only points in (0.5 - η, 0.5) see the jump
        assert!((shifted_difference_sq(&mesh, &w, [0.1, 0.0]) - 0.1).abs() < 1e-15);
        assert_eq!(shifted_difference_sq(&mesh, &w, [0.0, 0.0]), 0.0);
        let rect = Mesh::rectangle(1.0, 1.0, 2, 2).unwrap();
        let w = [0.0, 1.0, 0.0, 1.0];
        assert!((shifted_difference_sq(&rect, &w, [0.1, 0.2]) - 0.1 * 0.8).abs() < 1e-15);
    }
}
