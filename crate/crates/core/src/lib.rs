//! Implicit finite-volume scheme for scalar degenerate
//! convection-diffusion equations
//!
//! ```text
//! u_t + div f(u) - Δφ(u) = 0   in Ω × (0, T),
//! (f(u) - ∇φ(u))·n = 0          on ∂Ω,
//! ```
//!
//! on admissible interval and rectangle meshes. Besides time marching, the crate evaluates
//! the discrete estimates satisfied by the scheme (invariant region, entropy
//! inequalities, weak BV and L²H¹ bounds, translate functionals) so that a
//! computed trajectory can be checked rather than trusted.
//!
//! ```
//! use degen_fv::{march, FluxScheme, Mesh, Preset, Problem, SolverConfig};
//! use std::sync::Arc;
//!
//! let mesh = Arc::new(Mesh::interval(0.0, 1.0, 20, 1.0).unwrap());
//! let problem = Problem::preset(Preset::BurgersDegenerate).with_horizon(0.1);
//! let scheme = FluxScheme::godunov(&problem);
//! let traj = march(&mesh, &scheme, mesh.h(), &SolverConfig::default()).unwrap();
//! let (lo, hi) = degen_fv::diagnostics::linf_bounds(&traj);
//! assert!(lo >= -1e-8 && hi <= 1.0 + 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
mod error;
mod linalg;
pub mod mesh;
pub mod numflux;
pub mod problem;
pub mod solver;
pub mod study;

pub use diagnostics::{DiagnosticsOptions, DiagnosticsReport};
pub use error::{Error, Result};
pub use mesh::{CellField, Face, FaceKind, Mesh, Point};
pub use numflux::{EntropyKind, FaceGeometry, FluxAxiomReport, FluxScheme};
pub use problem::{Diffusion, InitialDatum, Polynomial, Preset, Problem, ProblemSpec};
pub use solver::{init_field, march, MarchFailure, SolveReport, SolverConfig, Trajectory};
