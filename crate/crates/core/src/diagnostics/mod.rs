//! Discrete estimates and entropy certificates evaluated on a trajectory.

mod continuous;
mod entropy;
mod estimates;
mod translate;

use serde::{Deserialize, Serialize};

pub use continuous::{continuous_entropy_functional, SpaceWeight, TestFunction, TimeWeight};
pub use entropy::{entropy_excess, entropy_residual, entropy_worst, k_grid, EntropyInequality};
pub use estimates::{l2h1_functional, linf_bounds, mass_drift, mass_series, weak_bv_functional, WEAK_BV_GRID};
pub use translate::{shifted_difference_sq, space_translate_functional, time_translate_functional};

use crate::error::Result;
use crate::numflux::FluxScheme;
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsOptions {
    /// Uniform entropy levels on `[0, u_max]`, to which `0`, `u_c` and
    /// `u_max` are added.
    pub k_grid_points: usize,
    /// Space offsets along the first axis; those of `h, h/2, h/4` below the
    /// domain diameter when absent.
    pub space_offsets: Option<Vec<f64>>,
    /// Time offsets; `δt, 2δt, 4δt` when absent.
    pub time_offsets: Option<Vec<f64>>,
    pub test_functions: Option<Vec<TestFunction>>,
    /// Entropy levels for the continuous functional, as fractions of `u_max`.
    pub continuous_levels: Vec<f64>,
    pub entropy: bool,
    pub weak_bv: bool,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            k_grid_points: 33,
            space_offsets: None,
            time_offsets: None,
            test_functions: None,
            continuous_levels: vec![0.1, 0.3, 0.7],
            entropy: true,
            weak_bv: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetValue {
    pub offset: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEntry {
    pub test_function: usize,
    pub k: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub final_time: f64,
    pub linf_min: f64,
    pub linf_max: f64,
    pub mass_initial: f64,
    pub mass_drift: f64,
    pub mass_drift_relative: f64,
    /// Worst excess over the sub, super and full inequalities and the k grid.
    pub entropy_worst_violation: Option<f64>,
    pub entropy_worst_sub: Option<f64>,
    pub entropy_worst_super: Option<f64>,
    pub entropy_worst_full: Option<f64>,
    pub weak_bv_value: Option<f64>,
    /// `weak_bv_value·√h`.
    pub weak_bv_scaled: Option<f64>,
    pub l2h1_value: f64,
    pub translate_space: Vec<OffsetValue>,
    pub translate_time: Vec<OffsetValue>,
    pub continuous_entropy: Vec<ContinuousEntry>,
    pub continuous_entropy_min: f64,
}

/// Evaluates every enabled diagnostic on `traj`.
pub fn diagnose(traj: &Trajectory, scheme: &FluxScheme, options: &DiagnosticsOptions) -> Result<DiagnosticsReport> {
    let problem = scheme.problem();
    let mesh = &*traj.mesh;
    let h = mesh.h();
    let (linf_min, linf_max) = linf_bounds(traj);
    let masses = mass_series(traj);
    let mass_drift = mass_drift(traj);
    let mass_initial = masses[0];
    let mass_drift_relative = if mass_initial.abs() > 0.0 { mass_drift / mass_initial.abs() } else { mass_drift };

    let (mut sub, mut sup, mut full) = (None, None, None);
    if options.entropy && traj.steps() > 0 {
        let ks = k_grid(problem.u_max, problem.u_c(), options.k_grid_points);
        sub = Some(entropy_worst(traj, scheme, &ks, EntropyInequality::Sub)?);
        sup = Some(entropy_worst(traj, scheme, &ks, EntropyInequality::Super)?);
        full = Some(entropy_worst(traj, scheme, &ks, EntropyInequality::Full)?);
    }
    let entropy_worst_violation = match (sub, sup, full) {
        (Some(a), Some(b), Some(c)) => Some(a.max(b).max(c)),
        _ => None,
    };

    let weak_bv_value = if options.weak_bv { Some(weak_bv_functional(traj, scheme)?) } else { None };

    let diameter = mesh.domain_diameter();
    let space = options
        .space_offsets
        .clone()
        .unwrap_or_else(|| [1.0, 0.5, 0.25].iter().map(|m| m * h).filter(|&s| s < diameter).collect());
    let translate_space = space
        .iter()
        .map(|&s| Ok(OffsetValue { offset: s, value: space_translate_functional(traj, problem, [s, 0.0])? }))
        .collect::<Result<Vec<_>>>()?;
    let times = options
        .time_offsets
        .clone()
        .unwrap_or_else(|| [1.0, 2.0, 4.0].iter().map(|m| m * traj.dt).filter(|&t| t < traj.final_time()).collect());
    let translate_time = times
        .iter()
        .map(|&t| Ok(OffsetValue { offset: t, value: time_translate_functional(traj, problem, t)? }))
        .collect::<Result<Vec<_>>>()?;

    let tests = options
        .test_functions
        .clone()
        .unwrap_or_else(|| TestFunction::defaults(mesh.bounds(), problem.horizon));
    let mut continuous_entropy = Vec::new();
    for (i, t) in tests.iter().enumerate() {
        for &frac in &options.continuous_levels {
            let k = frac * problem.u_max;
            continuous_entropy.push(ContinuousEntry {
                test_function: i,
                k,
                value: continuous_entropy_functional(traj, problem, k, t)?,
            });
        }
    }
    let continuous_entropy_min = continuous_entropy.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);

    Ok(DiagnosticsReport {
        h,
        dt: traj.dt,
        steps: traj.steps(),
        final_time: traj.final_time(),
        linf_min,
        linf_max,
        mass_initial,
        mass_drift,
        mass_drift_relative,
        entropy_worst_violation,
        entropy_worst_sub: sub,
        entropy_worst_super: sup,
        entropy_worst_full: full,
        weak_bv_value,
        weak_bv_scaled: weak_bv_value.map(|v| v * h.sqrt()),
        l2h1_value: l2h1_functional(traj, problem),
        translate_space,
        translate_time,
        continuous_entropy,
        continuous_entropy_min: if continuous_entropy_min.is_finite() { continuous_entropy_min } else { 0.0 },
    })
}
