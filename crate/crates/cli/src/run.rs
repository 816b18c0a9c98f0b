use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use degen_fv::diagnostics::diagnose;
use degen_fv::mesh::MeshSummary;
use degen_fv::solver::march_with;
use degen_fv::{CellField, DiagnosticsReport, Mesh, Problem, SolveReport, Trajectory};
use serde::Serialize;

use crate::config::{scheme_label, RunConfig};
use crate::CliError;

/// Hard invariant tolerances checked after every run.
pub const MASS_TOL: f64 = 1e-9;
pub const BOX_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct Invariants {
    pub mass_drift_relative: f64,
    pub mass_ok: bool,
    pub linf_min: f64,
    pub linf_max: f64,
    pub box_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub config: RunConfig,
    pub problem: String,
    pub scheme: String,
    pub mesh: MeshSummary,
    pub dt: f64,
    pub horizon: f64,
    pub steps_planned: usize,
    pub steps_completed: usize,
    pub final_time: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<Invariants>,
    pub state_files: Vec<String>,
    pub step_reports: Vec<SolveReport>,
    pub wall_time_seconds: f64,
}

/// A finished run: its trajectory and diagnostics, or the reason it failed.
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub report: Option<DiagnosticsReport>,
    pub problem: Problem,
    pub failure: Option<String>,
}

fn state_name(level: usize) -> String {
    format!("state_{level:06}.csv")
}

pub fn write_state(path: &Path, mesh: &Mesh, problem: &Problem, field: &CellField) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let dim = mesh.dimension();
    writeln!(w, "{}", if dim == 1 { "id,x,u,phi" } else { "id,x,y,u,phi" })?;
    for (c, &u) in mesh.cells().iter().zip(&field.values) {
        write!(w, "{}", c.id)?;
        for x in &c.center[..dim] {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w, ",{u:.16e},{:.16e}", problem.phi(u))?;
    }
    w.flush()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

/// Runs one simulation and writes its artifacts into `out`.
///
/// Configuration errors are returned as `Err`; solver failures and invariant
/// violations produce an outcome with `failure` set, after the artifacts of
/// the completed levels have been written.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let setup = config.setup()?;
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let mesh = &setup.mesh;
    let problem = setup.problem.clone();
    write_json(&out.join("mesh.json"), &mesh.summary())?;
    let mut geometry = BufWriter::new(File::create(out.join("geometry.csv"))?);
    mesh.write_geometry_csv(&mut geometry)?;
    geometry.flush()?;

    let steps_planned = degen_fv::solver::step_count(problem.horizon, setup.dt);
    let stride = config.dump_stride;
    let mut state_files = Vec::new();
    let mut io_error = None;
    let marched = march_with(mesh, &setup.scheme, setup.dt, &config.solver, |field, _| {
        let due = (stride > 0 && field.level % stride == 0) || field.level == steps_planned;
        if due && io_error.is_none() {
            let name = state_name(field.level);
            match write_state(&out.join(&name), mesh, &problem, field) {
                Ok(()) => state_files.push(name),
                Err(e) => io_error = Some(e),
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }

    let (trajectory, mut failure) = match marched {
        Ok(t) => (t, None),
        Err(f) => {
            let msg = f.to_string();
            match f.partial {
                Some(t) => (t, Some(msg)),
                None => return Err(CliError::Config(msg)),
            }
        }
    };
    // Keep the last completed level on disk even when it was not due.
    let last = trajectory.last();
    if failure.is_some() && !state_files.last().is_some_and(|n| *n == state_name(last.level)) {
        write_state(&out.join(state_name(last.level)), mesh, &problem, last)?;
        state_files.push(state_name(last.level));
    }

    let mut report = None;
    let mut invariants = None;
    if failure.is_none() {
        let r = diagnose(&trajectory, &setup.scheme, &config.diagnostics).map_err(|e| CliError::Config(format!("diagnostics: {e}")))?;
        let inv = Invariants {
            mass_drift_relative: r.mass_drift_relative,
            mass_ok: r.mass_drift_relative <= MASS_TOL,
            linf_min: r.linf_min,
            linf_max: r.linf_max,
            box_ok: r.linf_min >= -BOX_TOL && r.linf_max <= problem.u_max + BOX_TOL,
        };
        if !inv.mass_ok {
            failure = Some(format!("relative mass drift {:e} exceeds {MASS_TOL:e}", inv.mass_drift_relative));
        } else if !inv.box_ok {
            failure = Some(format!(
                "values [{:e}, {:e}] leave [0, {}] by more than {BOX_TOL:e}",
                inv.linf_min, inv.linf_max, problem.u_max
            ));
        }
        write_json(&out.join("diagnostics.json"), &r)?;
        report = Some(r);
        invariants = Some(inv);
    }

    let status = match (&failure, &invariants) {
        (None, _) => "ok",
        (Some(_), Some(_)) => "invariant_violation",
        (Some(_), None) => "step_failure",
    };
    let manifest = Manifest {
        config_sha256: config.hash(),
        config: RunConfig { output: None, ..config.clone() },
        problem: problem.name.clone(),
        scheme: scheme_label(setup.scheme.kind()),
        mesh: mesh.summary(),
        dt: setup.dt,
        horizon: problem.horizon,
        steps_planned,
        steps_completed: trajectory.steps(),
        final_time: trajectory.final_time(),
        status: status.into(),
        failure: failure.clone(),
        invariants,
        state_files,
        step_reports: trajectory.reports.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(RunOutcome { trajectory, report, problem, failure })
}
