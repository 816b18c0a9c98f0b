use degen_fv::mesh::AdmissibilityReport;
use degen_fv::problem::ValidationReport;
use degen_fv::FluxAxiomReport;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const SAMPLES: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub problem: ValidationReport,
    pub mesh: AdmissibilityReport,
    pub flux: FluxAxiomReport,
    pub pass: bool,
}

/// Problem validation, mesh admissibility and sampled flux axioms.
pub fn check(config: &RunConfig) -> Result<CheckReport, CliError> {
    let setup = config.setup()?;
    let problem = setup.problem.validate(SAMPLES);
    let mesh = setup.mesh.check_admissibility();
    let flux = setup.scheme.check_flux_axioms(SAMPLES);
    let pass = problem.pass && mesh.pass && flux.pass;
    Ok(CheckReport { problem, mesh, flux, pass })
}
