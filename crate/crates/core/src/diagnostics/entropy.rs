use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::FaceKind;
use crate::numflux::{EntropyKind, FaceGeometry, FluxScheme};
use crate::solver::Trajectory;

/// Which family of discrete entropy inequalities to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyInequality {
    /// `η(u) = (u - k)⁺` with `Φ⁺`.
    Sub,
    /// `η(u) = (k - u)⁺` with `Φ⁻`.
    Super,
    /// `η(u) = |u - k|` with `Φ`.
    Full,
}

impl EntropyInequality {
    fn eta(self, u: f64, k: f64) -> f64 {
        match self {
            EntropyInequality::Sub => (u - k).max(0.0),
            EntropyInequality::Super => (k - u).max(0.0),
            EntropyInequality::Full => (u - k).abs(),
        }
    }

    /// Selection of the subdifferential of `η` at `u`, with `sign(0) = 0`.
    fn slope(self, u: f64, k: f64) -> f64 {
        match self {
            EntropyInequality::Sub => f64::from(u > k),
            EntropyInequality::Super => -f64::from(u < k),
            EntropyInequality::Full => sign(u - k),
        }
    }

    fn flux_kind(self) -> EntropyKind {
        match self {
            EntropyInequality::Sub => EntropyKind::Plus,
            EntropyInequality::Super => EntropyKind::Minus,
            EntropyInequality::Full => EntropyKind::Full,
        }
    }
}

pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Default entropy levels: `points` uniform values on `[0, u_max]` plus
/// `0`, `u_c` and `u_max`.
pub fn k_grid(u_max: f64, u_c: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let mut ks: Vec<f64> = (0..points).map(|i| u_max * i as f64 / (points - 1) as f64).collect();
    ks.extend([0.0, u_c, u_max]);
    ks
}

/// Per-cell excesses `LHS - RHS` of the discrete entropy inequality at level
/// `k` for step `n → n+1`, as a vector over cells.
pub fn entropy_excess(traj: &Trajectory, scheme: &FluxScheme, n: usize, k: f64, kind: EntropyInequality) -> Result<Vec<f64>> {
    let mesh = &*traj.mesh;
    let problem = scheme.problem();
    let (old, new) = (&traj.fields[n].values, &traj.fields[n + 1].values);
    let phi_k = problem.phi(k);
    let mut excess: Vec<f64> = mesh
        .cells()
        .iter()
        .map(|c| c.measure * (kind.eta(new[c.id], k) - kind.eta(old[c.id], k)) / traj.dt)
        .collect();
    for face in mesh.faces() {
        match face.kind {
            FaceKind::Interior { left, right } => {
                let geom = FaceGeometry::new(face.measure, face.normal);
                let (a, b) = (new[left], new[right]);
                excess[left] += scheme.entropy_face_flux(geom, a, b, k, kind.flux_kind())?;
                excess[right] += scheme.entropy_face_flux(geom.flipped(), b, a, k, kind.flux_kind())?;
                let tau = face.measure / face.center_distance;
                let (el, er) = (kind.eta(problem.phi(a), phi_k), kind.eta(problem.phi(b), phi_k));
                excess[left] -= tau * (er - el);
                excess[right] -= tau * (el - er);
            }
            FaceKind::Boundary { cell } => {
                let fk = face.measure * problem.flux_normal(k, face.normal);
                excess[cell] -= kind.slope(new[cell], k) * fk;
            }
        }
    }
    Ok(excess)
}

/// Largest positive excess over all cells and steps for one `k`.
pub fn entropy_residual(traj: &Trajectory, scheme: &FluxScheme, k: f64, kind: EntropyInequality) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 0..traj.steps() {
        for e in entropy_excess(traj, scheme, n, k, kind)? {
            worst = worst.max(e);
        }
    }
    Ok(worst)
}

/// Largest excess over a set of levels `ks`.
pub fn entropy_worst(traj: &Trajectory, scheme: &FluxScheme, ks: &[f64], kind: EntropyInequality) -> Result<f64> {
    let per_k = ks
        .par_iter()
        .map(|&k| entropy_residual(traj, scheme, k, kind))
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_k.into_iter().fold(0.0, f64::max))
}
