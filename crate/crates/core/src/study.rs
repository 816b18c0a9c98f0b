//! Comparisons between trajectories on nested meshes, and the exact
//! solution of the linear heat equation with a cosine datum.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mesh::{Mesh, Point};
use crate::problem::{InitialDatum, Problem};
use crate::solver::Trajectory;

/// Norms of the difference between a coarse and a fine trajectory over
/// `Ω × (0, T)`, `T` being the smaller final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelComparison {
    /// `‖u_fine - u_coarse‖_{L¹(Q)}`
    pub l1_u: f64,
    /// `‖φ(u_fine) - φ(u_coarse)‖_{L²(Q)}`
    pub l2_phi: f64,
    /// L²(Q) difference of discrete gradients of `φ(u)` on the fine diamonds.
    pub l2_grad_phi: f64,
}

/// Merged breakpoints of two piecewise-constant-in-time trajectories on
/// `[0, min(T_a, T_b)]`, as `(length, level_a, level_b)` slabs.
fn time_slabs(a: &Trajectory, b: &Trajectory) -> Vec<(f64, usize, usize)> {
    let end = a.final_time().min(b.final_time());
    let mut breaks = vec![0.0, end];
    for t in [a, b] {
        breaks.extend((1..=t.steps()).map(|n| n as f64 * t.dt).filter(|&x| x < end));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0], a.level_at(mid), b.level_at(mid))
        })
        .collect()
}

/// Compares `coarse` and `fine`, injecting coarse values into fine cells and
/// coarse diamond gradients into fine diamonds (zero outside coarse diamonds).
pub fn compare_levels(coarse: &Trajectory, fine: &Trajectory, problem: &Problem) -> Result<LevelComparison> {
    let (cm, fm) = (&*coarse.mesh, &*fine.mesh);
    let inject: Vec<usize> = fm
        .cells()
        .iter()
        .map(|c| cm.locate(c.center).ok_or_else(|| invalid("fine cell center outside the coarse mesh")))
        .collect::<Result<_>>()?;
    let fine_faces: Vec<usize> = fm.interior_faces().map(|f| f.id).collect();
    let coarse_diamond: Vec<Option<usize>> = fine_faces
        .iter()
        .map(|&f| cm.locate_diamond(fm.diamond_centroid(f).unwrap()))
        .collect();

    let phi = |v: &[f64]| -> Vec<f64> { v.iter().map(|&x| problem.phi(x)).collect() };
    let (mut l1, mut l2, mut grad) = (0.0, 0.0, 0.0);
    for (len, lc, lf) in time_slabs(coarse, fine) {
        let uc = &coarse.fields[lc].values;
        let uf = &fine.fields[lf].values;
        let (pc, pf) = (phi(uc), phi(uf));
        for c in fm.cells() {
            let k = inject[c.id];
            l1 += len * c.measure * (uf[c.id] - uc[k]).abs();
            l2 += len * c.measure * (pf[c.id] - pc[k]).powi(2);
        }
        for (&f, cd) in fine_faces.iter().zip(&coarse_diamond) {
            let gf = fm.discrete_gradient(&pf, f)?;
            let gc: Point = match cd {
                Some(g) => cm.discrete_gradient(&pc, *g)?,
                None => [0.0, 0.0],
            };
            let md = fm.diamond_measure(f)?;
            grad += len * md * ((gf[0] - gc[0]).powi(2) + (gf[1] - gc[1]).powi(2));
        }
    }
    Ok(LevelComparison { l1_u: l1, l2_phi: l2.sqrt(), l2_grad_phi: grad.sqrt() })
}

/// Exact solution `mean + amplitude·cos(kπξ)·exp(-c(kπ/L)² t)` of
/// `u_t = c u_xx` with zero-flux boundaries, for a linear-diffusion problem
/// without convection and with a cosine datum.
pub fn heat_exact(problem: &Problem, mesh: &Mesh) -> Result<impl Fn(Point, f64) -> f64> {
    let d = problem.diffusion;
    if !problem.flux.iter().all(|p| p.0.iter().all(|&c| c == 0.0)) || d.p != 1.0 || d.u_c != 0.0 {
        return Err(invalid("exact solution needs f ≡ 0 and φ(u) = c·u"));
    }
    let InitialDatum::Cosine { mean, amplitude, modes } = problem.initial else {
        return Err(invalid("exact solution needs a cosine datum"));
    };
    let (lo, hi) = mesh.bounds();
    let len = hi[0] - lo[0];
    let k = modes * std::f64::consts::PI / len;
    let c = d.c;
    Ok(move |x: Point, t: f64| mean + amplitude * (k * (x[0] - lo[0])).cos() * (-c * k * k * t).exp())
}

const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫_Ω |u_h(T) - u(T)|` at the trajectory's final time, integrating the
/// exact solution by 5-point Gauss quadrature per cell.
pub fn heat_l1_error(traj: &Trajectory, problem: &Problem) -> Result<f64> {
    let mesh = &*traj.mesh;
    let exact = heat_exact(problem, mesh)?;
    let t = traj.final_time();
    let u = &traj.last().values;
    let mut err = 0.0;
    for c in mesh.cells() {
        let (x0, x1) = (c.lo[0], c.hi[0]);
        let ys: Vec<(f64, f64)> = if mesh.dimension() == 1 {
            vec![(0.0, 1.0)]
        } else {
            GAUSS5
                .iter()
                .map(|&(s, w)| (0.5 * (c.lo[1] + c.hi[1]) + 0.5 * (c.hi[1] - c.lo[1]) * s, 0.5 * w))
                .collect()
        };
        let mut acc = 0.0;
        for &(y, wy) in &ys {
            for &(s, w) in &GAUSS5 {
                let x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * s;
                acc += 0.5 * w * wy * (u[c.id] - exact([x, y], t)).abs();
            }
        }
        err += acc * c.measure;
    }
    Ok(err)
}

/// Observed orders `log2(e_i / e_{i+1})` of a sequence of errors on meshes
/// refined by a factor 2.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Preset;
    use std::sync::Arc;

    fn constant(n: usize, dt: f64, steps: usize, c: f64) -> Trajectory {
        let mesh = Arc::new(Mesh::interval(0.0, 1.0, n, 1.0).unwrap());
        Trajectory::from_levels(mesh, dt, vec![vec![c; n]; steps + 1]).unwrap()
    }

    #[test]
    fn constant_levels_agree() {
        let p = Problem::preset(Preset::BurgersDegenerate);
        let cmp = compare_levels(&constant(4, 0.25, 4, 0.7), &constant(8, 0.125, 8, 0.7), &p).unwrap();
        assert_eq!(cmp, LevelComparison { l1_u: 0.0, l2_phi: 0.0, l2_grad_phi: 0.0 });
    }

    #[test]
    fn offset_levels_differ_by_the_offset() {
        let p = Problem::preset(Preset::Heat);
        let cmp = compare_levels(&constant(4, 0.25, 4, 0.5), &constant(8, 0.125, 8, 0.75), &p).unwrap();
        assert!((cmp.l1_u - 0.25).abs() < 1e-15);
        assert!((cmp.l2_phi - 0.25).abs() < 1e-15);
        assert_eq!(cmp.l2_grad_phi, 0.0);
    }

    #[test]
    fn slabs_merge_breakpoints() {
        let a = constant(2, 0.3, 2, 0.0);
        let b = constant(2, 0.2, 4, 0.0);
        let s = time_slabs(&a, &b);
        let lens: Vec<f64> = s.iter().map(|x| x.0).collect();
        assert_eq!(s.len(), 4);
        assert!((lens.iter().sum::<f64>() - 0.6).abs() < 1e-15);
        assert_eq!((s[0].1, s[0].2), (1, 1));
        assert_eq!((s[1].1, s[1].2), (1, 2));
        assert_eq!((s[2].1, s[2].2), (2, 2));
        assert_eq!((s[3].1, s[3].2), (2, 3));
    }

    #[test]
    fn exact_heat_at_time_zero_matches_averages() {
        let p = Problem::preset(Preset::Heat);
        let mesh = Arc::new(Mesh::interval(0.0, 1.0, 10, 1.0).unwrap());
        let u0 = crate::solver::init_field(&mesh, &p).unwrap();
        let traj = Trajectory::from_levels(mesh.clone(), 0.1, vec![u0.values]).unwrap();
        let err = heat_l1_error(&traj, &p).unwrap();
        // L¹ distance of a smooth function to its cell averages is O(h).
        assert!(err > 0.0 && err < 0.1 * 0.4 * std::f64::consts::PI);
        assert!(heat_exact(&Problem::preset(Preset::PorousMedium), &mesh).is_err());
    }

    #[test]
    fn orders() {
        let o = observed_orders(&[0.4, 0.2, 0.1]);
        assert_eq!(o, vec![1.0, 1.0]);
    }
}
