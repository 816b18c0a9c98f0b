use std::path::{Path, PathBuf};
use std::sync::Arc;

use degen_fv::numflux::FluxKind;
use degen_fv::{DiagnosticsOptions, FluxScheme, Mesh, Problem, ProblemSpec, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub dt: TimeStep,
    /// Overrides the problem's horizon.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Write `state_<n>.csv` every `dump_stride` levels (0: final level only).
    #[serde(default = "one")]
    pub dump_stride: usize,
}

fn one() -> usize {
    1
}

fn zero() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Interval {
        #[serde(default = "zero")]
        a: f64,
        #[serde(default = "unit")]
        b: f64,
        n: usize,
        #[serde(default = "unit")]
        grading: f64,
    },
    Rect {
        #[serde(default = "unit")]
        lx: f64,
        #[serde(default = "unit")]
        ly: f64,
        nx: usize,
        ny: usize,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeSpec {
    #[default]
    Godunov,
    Rusanov {
        /// Sampled `1.01·sup|f'|` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshRule {
    /// `δt = h`
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    Rule(MeshRule),
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::Rule(MeshRule::H)
    }
}

/// A configuration resolved into solver objects.
pub struct Setup {
    pub problem: Problem,
    pub mesh: Arc<Mesh>,
    pub scheme: FluxScheme,
    pub dt: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Parses a JSON document, reporting the failing field path and position.
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            format!("field `{path}`: {inner}")
        })
    }

    /// The configuration of refinement level `level`: cell counts multiplied
    /// by `2^level`. A fixed time step is kept; `δt = h` follows the mesh.
    pub fn refined(&self, level: usize) -> RunConfig {
        let f = 1usize << level;
        let mut c = self.clone();
        c.mesh = match self.mesh {
            MeshSpec::Interval { a, b, n, grading } => MeshSpec::Interval { a, b, n: n * f, grading },
            MeshSpec::Rect { lx, ly, nx, ny } => MeshSpec::Rect { lx, ly, nx: nx * f, ny: ny * f },
        };
        c
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let config_err = |e: degen_fv::Error| CliError::Config(e.to_string());
        let mut problem = self.problem.build().map_err(config_err)?;
        if let Some(t) = self.horizon {
            if !(t > 0.0) {
                return Err(CliError::Config(format!("T must be positive, got {t}")));
            }
            problem = problem.with_horizon(t);
        }
        let mesh = match self.mesh {
            MeshSpec::Interval { a, b, n, grading } => Mesh::interval(a, b, n, grading),
            MeshSpec::Rect { lx, ly, nx, ny } => Mesh::rectangle(lx, ly, nx, ny),
        }
        .map_err(config_err)?;
        problem.check_dimension(mesh.dimension()).map_err(config_err)?;
        let scheme = match self.scheme {
            SchemeSpec::Godunov => FluxScheme::godunov(&problem),
            SchemeSpec::Rusanov { lambda } => FluxScheme::rusanov(&problem, lambda),
        };
        let dt = match self.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Rule(MeshRule::H) => mesh.h(),
        };
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(CliError::Config(format!("time step must be positive, got {dt}")));
        }
        self.solver.validate().map_err(config_err)?;
        Ok(Setup { problem, mesh: Arc::new(mesh), scheme, dt })
    }
}

pub fn scheme_label(kind: FluxKind) -> String {
    match kind {
        FluxKind::Godunov => "godunov".into(),
        FluxKind::Rusanov { lambda } => format!("rusanov(lambda={lambda})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"{"problem": {"preset": "burgers_degenerate"}, "mesh": {"kind": "interval", "n": 10}}"#;

    #[test]
    fn defaults() {
        let c = RunConfig::parse(BASIC).unwrap();
        assert_eq!(c.scheme, SchemeSpec::Godunov);
        assert_eq!(c.dt, TimeStep::Rule(MeshRule::H));
        assert_eq!(c.dump_stride, 1);
        let s = c.setup().unwrap();
        assert_eq!(s.dt, s.mesh.h());
        assert!((s.dt - 0.1).abs() < 1e-15);
        assert_eq!(s.mesh.n_cells(), 10);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = r#"{"problem": {"preset": "wave"}, "mesh": {"kind": "interval", "n": 10}}"#;
        let e = RunConfig::parse(bad).unwrap_err();
        assert!(e.contains("problem.preset"), "{e}");
        let bad = r#"{"problem": {"preset": "heat"}, "mesh": {"kind": "interval", "n": 10},
                      "solver": {"newton_tol": "tight"}}"#;
        let e = RunConfig::parse(bad).unwrap_err();
        assert!(e.contains("solver.newton_tol") && e.contains("line 2"), "{e}");
    }

    #[test]
    fn refinement_and_hash() {
        let c = RunConfig::parse(BASIC).unwrap();
        let r = c.refined(2);
        assert_eq!(r.mesh, MeshSpec::Interval { a: 0.0, b: 1.0, n: 40, grading: 1.0 });
        assert_ne!(c.hash(), r.hash());
        let mut moved = c.clone();
        moved.output = Some("elsewhere".into());
        assert_eq!(c.hash(), moved.hash());
    }

    #[test]
    fn fixed_step_and_rusanov() {
        let text = r#"{"problem": {"preset": "heat"}, "mesh": {"kind": "rect", "nx": 4, "ny": 2},
                       "scheme": {"name": "rusanov", "lambda": 0.5}, "dt": 0.01, "T": 0.05}"#;
        let c = RunConfig::parse(text).unwrap();
        let s = c.setup().unwrap();
        assert_eq!(s.dt, 0.01);
        assert_eq!(s.problem.horizon, 0.05);
        assert_eq!(s.scheme.name(), "rusanov");
    }
}
