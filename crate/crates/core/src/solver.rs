//! Implicit Euler finite-volume scheme with zero-flux boundaries and its
//! nonlinear solve.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::BandMatrix;
use crate::mesh::{CellField, FaceKind, Mesh};
use crate::numflux::{FaceGeometry, FluxScheme};

/// Slack below 0 / above `u_max` tolerated on initial cell averages.
const INIT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Residual tolerance relative to `max(1, max_K m(K)·u_max/δt)`.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Floor on the derivative of φ in the Newton matrix.
    pub phi_kink_regularization: f64,
    pub picard_fallback: bool,
    pub max_picard_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            backtrack_factor: 0.5,
            max_backtracks: 30,
            phi_kink_regularization: 1e-9,
            picard_fallback: true,
            max_picard_iters: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(invalid("newton_tol must be positive"));
        }
        if !(self.phi_kink_regularization >= 0.0) {
            return Err(invalid("phi_kink_regularization must be nonnegative"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(invalid("backtrack_factor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub step: usize,
    pub newton_iterations: usize,
    pub picard_iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub fallback_used: bool,
}

/// Cell averages of the initial datum.
pub fn init_field(mesh: &Mesh, problem: &crate::Problem) -> Result<CellField> {
    let bounds = mesh.bounds();
    let mut values = Vec::with_capacity(mesh.n_cells());
    for cell in mesh.cells() {
        let v = problem.initial.cell_average(cell, bounds);
        if !(v >= -INIT_SLACK && v <= problem.u_max + INIT_SLACK) {
            return Err(Error::InvalidInitialDatum { cell: cell.id, value: v, u_max: problem.u_max });
        }
        values.push(v);
    }
    CellField::new(mesh, values, 0, 0.0)
}

fn face_geometry(mesh: &Mesh, f: usize) -> FaceGeometry {
    let face = mesh.face(f);
    FaceGeometry::new(face.measure, face.normal)
}

/// Residual of the implicit scheme for one step:
/// `R_K = m(K)(u_K - u_K^old)/δt + Σ_σ F_{K,σ}(u_K, u_L) - Σ_σ τ_σ (φ(u_L) - φ(u_K))`,
/// boundary faces contributing nothing.
pub fn assemble_residual(mesh: &Mesh, scheme: &FluxScheme, u_old: &[f64], u_new: &[f64], dt: f64) -> Result<Vec<f64>> {
    if u_old.len() != mesh.n_cells() || u_new.len() != mesh.n_cells() {
        return Err(invalid("field length does not match cell count"));
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let problem = scheme.problem();
    let mut r: Vec<f64> = mesh
        .cells()
        .iter()
        .map(|c| c.measure * (u_new[c.id] - u_old[c.id]) / dt)
        .collect();
    let convective = !problem.flux.is_empty();
    for face in mesh.interior_faces() {
        let FaceKind::Interior { left: k, right: l } = face.kind else { unreachable!() };
        let mut flow = if convective {
            scheme.face_flux(face_geometry(mesh, face.id), u_new[k], u_new[l])?
        } else {
            0.0
        };
        flow -= face.measure / face.center_distance * (problem.phi(u_new[l]) - problem.phi(u_new[k]));
        r[k] += flow;
        r[l] -= flow;
    }
    Ok(r)
}

fn bandwidth(mesh: &Mesh) -> usize {
    mesh.interior_faces()
        .filter_map(|f| f.neighbours())
        .map(|(k, l)| k.abs_diff(l))
        .max()
        .unwrap_or(0)
}

fn jacobian(mesh: &Mesh, scheme: &FluxScheme, u: &[f64], dt: f64, eps: f64, bw: usize) -> Result<BandMatrix> {
    let problem = scheme.problem();
    let mut j = BandMatrix::zeros(mesh.n_cells(), bw);
    for c in mesh.cells() {
        j.add(c.id, c.id, c.measure / dt);
    }
    let dphi = |v: f64| problem.diffusion.right_derivative(v).max(eps);
    let convective = !problem.flux.is_empty();
    for face in mesh.interior_faces() {
        let FaceKind::Interior { left: k, right: l } = face.kind else { unreachable!() };
        let (da, db) = if convective {
            scheme.face_flux_partials(face_geometry(mesh, face.id), u[k], u[l])?
        } else {
            (0.0, 0.0)
        };
        let tau = face.measure / face.center_distance;
        let (pk, pl) = (tau * dphi(u[k]), tau * dphi(u[l]));
        j.add(k, k, da + pk);
        j.add(k, l, db - pl);
        j.add(l, k, -da - pk);
        j.add(l, l, -db + pl);
    }
    Ok(j)
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Absolute residual tolerance for a step of size `dt`.
pub fn residual_tolerance(mesh: &Mesh, u_max: f64, dt: f64, config: &SolverConfig) -> f64 {
    let scale = mesh.cells().iter().map(|c| c.measure * u_max / dt).fold(1.0, f64::max);
    config.newton_tol * scale
}

/// Advances `u_old` by one implicit step, starting Newton from `u_old`.
pub fn solve_step(
    mesh: &Mesh,
    scheme: &FluxScheme,
    u_old: &CellField,
    dt: f64,
    config: &SolverConfig,
) -> Result<(CellField, SolveReport)> {
    solve_step_from(mesh, scheme, u_old, &u_old.values, dt, config)
}

/// Advances `u_old` by one implicit step, starting Newton from `guess`.
pub fn solve_step_from(
    mesh: &Mesh,
    scheme: &FluxScheme,
    u_old: &CellField,
    guess: &[f64],
    dt: f64,
    config: &SolverConfig,
) -> Result<(CellField, SolveReport)> {
    config.validate()?;
    scheme.problem().check_dimension(mesh.dimension())?;
    let step = u_old.level + 1;
    let tol = residual_tolerance(mesh, scheme.problem().u_max, dt, config);
    let bw = bandwidth(mesh);
    let old = &u_old.values;
    let residual = |v: &[f64]| assemble_residual(mesh, scheme, old, v, dt);

    let mut v = guess.to_vec();
    let mut r = residual(&v)?;
    let mut rn = norm_inf(&r);
    let mut report = SolveReport {
        step,
        newton_iterations: 0,
        picard_iterations: 0,
        residual: rn,
        tolerance: tol,
        fallback_used: false,
    };
    let finish = |v: Vec<f64>, mut report: SolveReport, rn: f64| {
        report.residual = rn;
        CellField::new(mesh, v, step, u_old.time + dt).map(|f| (f, report))
    };

    let mut stalled = false;
    while rn > tol && report.newton_iterations < config.max_newton_iters {
        report.newton_iterations += 1;
        let mut d: Vec<f64> = r.iter().map(|x| -x).collect();
        let lu = jacobian(mesh, scheme, &v, dt, config.phi_kink_regularization, bw)
            .and_then(|mut j| j.solve_in_place(&mut d));
        if lu.is_err() {
            stalled = true;
            break;
        }
        let mut omega = 1.0;
        let mut accepted = false;
        for _ in 0..=config.max_backtracks {
            let trial: Vec<f64> = v.iter().zip(&d).map(|(x, dx)| x + omega * dx).collect();
            if let Ok(rt) = residual(&trial) {
                let tn = norm_inf(&rt);
                if tn < rn {
                    v = trial;
                    r = rt;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            omega *= config.backtrack_factor;
        }
        if !accepted {
            stalled = true;
            break;
        }
    }
    if rn <= tol {
        return finish(v, report, rn);
    }

    if config.picard_fallback {
        report.fallback_used = true;
        let mut omega = 1.0;
        while rn > tol && report.picard_iterations < config.max_picard_iters && omega > 1e-9 {
            report.picard_iterations += 1;
            let trial: Vec<f64> = mesh
                .cells()
                .iter()
                .map(|c| v[c.id] - omega * dt / c.measure * r[c.id])
                .collect();
            match residual(&trial) {
                Ok(rt) if norm_inf(&rt) < rn => {
                    rn = norm_inf(&rt);
                    v = trial;
                    r = rt;
                    omega = (omega * 2.0).min(1.0);
                }
                _ => omega *= 0.5,
            }
        }
        if rn <= tol {
            return finish(v, report, rn);
        }
    }

    let reason = if stalled {
        format!("Newton stalled with residual {rn:.3e} > {tol:.3e}")
    } else {
        format!("no convergence: residual {rn:.3e} > {tol:.3e}")
    };
    Err(Error::StepFailure { step, reason, iterate: v, residual: r })
}

/// Sequence of time levels `u⁰, …, u^N` with `u^{n+1}` valid on `(nδt, (n+1)δt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mesh: Arc<Mesh>,
    pub dt: f64,
    pub fields: Vec<CellField>,
    /// One report per computed step (none for hand-built trajectories).
    pub reports: Vec<SolveReport>,
}

impl Trajectory {
    /// Wraps given levels, stamping level `n` at time `n·δt`.
    pub fn from_levels(mesh: Arc<Mesh>, dt: f64, levels: Vec<Vec<f64>>) -> Result<Trajectory> {
        if !(dt > 0.0) {
            return Err(invalid("time step must be positive"));
        }
        if levels.is_empty() {
            return Err(invalid("a trajectory needs at least the initial level"));
        }
        let fields = levels
            .into_iter()
            .enumerate()
            .map(|(n, v)| CellField::new(&mesh, v, n, n as f64 * dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { mesh, dt, fields, reports: Vec::new() })
    }

    /// Number of computed steps `N + 1` (levels minus one).
    pub fn steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn initial(&self) -> &CellField {
        &self.fields[0]
    }

    pub fn last(&self) -> &CellField {
        self.fields.last().unwrap()
    }

    /// Level index representing time `t` (the level ending the slab that
    /// contains `t`; level 0 at `t = 0`).
    pub fn level_at(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        ((t / self.dt).ceil() as usize).clamp(1, self.steps().max(1)).min(self.steps())
    }
}

/// A march that stopped early, with the levels computed so far.
#[derive(Debug, Clone)]
pub struct MarchFailure {
    pub error: Error,
    pub partial: Option<Trajectory>,
}

impl fmt::Display for MarchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.partial {
            Some(t) => write!(f, "{} (after {} completed steps)", self.error, t.steps()),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for MarchFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for MarchFailure {
    fn from(error: Error) -> Self {
        MarchFailure { error, partial: None }
    }
}

/// Number of steps of size `dt` needed to reach `horizon`.
pub fn step_count(horizon: f64, dt: f64) -> usize {
    ((horizon / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Marches from the initial cell averages up to the first `nδt ≥ T`.
#[allow(clippy::result_large_err)]
pub fn march(
    mesh: &Arc<Mesh>,
    scheme: &FluxScheme,
    dt: f64,
    config: &SolverConfig,
) -> std::result::Result<Trajectory, MarchFailure> {
    march_with(mesh, scheme, dt, config, |_, _| {})
}

/// Like [`march`], calling `observer` after each completed level.
#[allow(clippy::result_large_err)]
pub fn march_with(
    mesh: &Arc<Mesh>,
    scheme: &FluxScheme,
    dt: f64,
    config: &SolverConfig,
    mut observer: impl FnMut(&CellField, Option<&SolveReport>),
) -> std::result::Result<Trajectory, MarchFailure> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("time step must be positive, got {dt}")).into());
    }
    config.validate()?;
    let problem = scheme.problem();
    problem.check_dimension(mesh.dimension())?;
    let u0 = init_field(mesh, problem)?;
    observer(&u0, None);
    let steps = step_count(problem.horizon, dt);
    let mut traj = Trajectory { mesh: mesh.clone(), dt, fields: vec![u0], reports: Vec::with_capacity(steps) };
    for n in 0..steps {
        match solve_step(mesh, scheme, &traj.fields[n], dt, config) {
            Ok((mut u, report)) => {
                u.time = (n + 1) as f64 * dt;
                observer(&u, Some(&report));
                traj.fields.push(u);
                traj.reports.push(report);
            }
            Err(error) => return Err(MarchFailure { error, partial: Some(traj) }),
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Diffusion, InitialDatum, Preset, Problem};
    use approx::assert_abs_diff_eq;

    fn heat_two_cells() -> (Mesh, FluxScheme) {
        (Mesh::interval(0.0, 1.0, 2, 1.0).unwrap(), FluxScheme::godunov(&Problem::preset(Preset::Heat)))
    }

    #[test]
    fn initial_averages() {
        let mesh = Mesh::interval(0.0, 1.0, 4, 1.0).unwrap();
        let p = Problem::preset(Preset::Heat).with_initial(InitialDatum::Step { left: 1.0, right: 0.0, at: 0.5 });
        assert_eq!(init_field(&mesh, &p).unwrap().values, vec![1.0, 1.0, 0.0, 0.0]);
        let p = p.with_initial(InitialDatum::Constant { value: 0.3 });
        assert_eq!(init_field(&mesh, &p).unwrap().values, vec![0.3; 4]);
        let p = p.with_initial(InitialDatum::Constant { value: 1.5 });
        assert!(matches!(init_field(&mesh, &p), Err(Error::InvalidInitialDatum { .. })));
    }

    #[test]
    fn hand_solved_heat_step() {
        let (mesh, scheme) = heat_two_cells();
        let r = assemble_residual(&mesh, &scheme, &[1.0, 0.0], &[2.0 / 3.0, 1.0 / 3.0], 0.25).unwrap();
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-15);
        let old = CellField::new(&mesh, vec![1.0, 0.0], 0, 0.0).unwrap();
        let (u, rep) = solve_step(&mesh, &scheme, &old, 0.25, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(u.values[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.values[1], 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(rep.newton_iterations, 1);
        assert!(!rep.fallback_used);
    }

    #[test]
    fn residual_telescopes() {
        let mesh = Mesh::interval(0.0, 1.0, 5, 1.3).unwrap();
        let scheme = FluxScheme::godunov(&Problem::preset(Preset::BurgersDegenerate));
        let old = [0.1, 0.5, 0.9, 0.3, 0.7];
        let new = [0.2, 0.4, 0.8, 0.6, 0.75];
        let r = assemble_residual(&mesh, &scheme, &old, &new, 0.1).unwrap();
        let lhs: f64 = r.iter().sum();
        let rhs: f64 = mesh.cells().iter().map(|c| c.measure * (new[c.id] - old[c.id]) / 0.1).sum();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn constants_are_fixed_points() {
        let mesh = Mesh::rectangle(1.0, 1.0, 3, 3).unwrap();
        let scheme = FluxScheme::godunov(&Problem::preset(Preset::PorousMedium));
        let old = CellField::constant(&mesh, 0.4);
        let r = assemble_residual(&mesh, &scheme, &old.values, &old.values, 0.1).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));
        let (u, rep) = solve_step(&mesh, &scheme, &old, 0.1, &SolverConfig::default()).unwrap();
        assert_eq!(u.values, old.values);
        assert_eq!(rep.newton_iterations, 0);
    }

    #[test]
    fn burgers_shock_conserves_mass() {
        let mesh = Arc::new(Mesh::interval(0.0, 1.0, 50, 1.0).unwrap());
        let p = Problem::preset(Preset::BurgersHyperbolic)
            .with_initial(InitialDatum::Step { left: 1.0, right: 0.0, at: 0.5 })
            .with_horizon(0.2);
        let traj = march(&mesh, &FluxScheme::godunov(&p), 0.01, &SolverConfig::default()).unwrap();
        assert_eq!(traj.steps(), 20);
        let mass = |f: &CellField| mesh.cells().iter().map(|c| c.measure * f.values[c.id]).sum::<f64>();
        let m0 = mass(traj.initial());
        for f in &traj.fields {
            assert!((mass(f) - m0).abs() <= 1e-10);
        }
    }

    #[test]
    fn step_count_rounding() {
        assert_eq!(step_count(0.1, 0.02), 5);
        assert_eq!(step_count(0.1, 0.04), 3);
        assert_eq!(step_count(0.5, 1.0 / 400.0), 200);
        assert_eq!(step_count(1e-9, 1.0), 1);
    }

    #[test]
    fn single_cell_is_frozen() {
        let mesh = Arc::new(Mesh::interval(0.0, 1.0, 1, 1.0).unwrap());
        let p = Problem::preset(Preset::BurgersDegenerate);
        let traj = march(&mesh, &FluxScheme::godunov(&p), 0.1, &SolverConfig::default()).unwrap();
        let mean = 0.5 * 0.2 + 0.5 * 0.9;
        for f in &traj.fields {
            assert_abs_diff_eq!(f.values[0], mean, epsilon = 1e-15);
        }
    }

    #[test]
    fn failure_keeps_partial_trajectory() {
        let mesh = Arc::new(Mesh::interval(0.0, 1.0, 10, 1.0).unwrap());
        let p = Problem::preset(Preset::BurgersHyperbolic);
        let config = SolverConfig { max_newton_iters: 0, picard_fallback: false, ..Default::default() };
        let err = march(&mesh, &FluxScheme::godunov(&p), 0.1, &config).unwrap_err();
        assert!(matches!(err.error, Error::StepFailure { step: 1, .. }));
        assert_eq!(err.partial.unwrap().steps(), 0);
    }

    #[test]
    fn picard_alone_converges_on_small_steps() {
        let mesh = Mesh::interval(0.0, 1.0, 4, 1.0).unwrap();
        let p = Problem::new(
            "pm",
            vec![],
            Diffusion { c: 1.0, p: 2.0, u_c: 0.0 },
            1.0,
            InitialDatum::Constant { value: 0.5 },
            1.0,
        )
        .unwrap();
        let scheme = FluxScheme::godunov(&p);
        let old = CellField::new(&mesh, vec![0.9, 0.6, 0.2, 0.1], 0, 0.0).unwrap();
        let config = SolverConfig { max_newton_iters: 0, ..Default::default() };
        let (u, rep) = solve_step(&mesh, &scheme, &old, 0.01, &config).unwrap();
        assert!(rep.fallback_used && rep.picard_iterations > 0);
        let (v, _) = solve_step(&mesh, &scheme, &old, 0.01, &SolverConfig::default()).unwrap();
        for (a, b) in u.values.iter().zip(&v.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}
