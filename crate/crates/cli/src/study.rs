use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use degen_fv::study::{compare_levels, heat_l1_error, LevelComparison};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::run::{run, RunOutcome};
use crate::CliError;

pub const HEADER_NOTE: &str = "# no closed-form entropy solution is assumed: this table certifies only the Cauchy property \
of consecutive levels plus the trends of the discrete certificates (heat problems also report the exact L1 error)";

pub const COLUMNS: &str = "level,cells,h,dt,steps,final_time,mass_drift,entropy_worst,weak_bv,weak_bv_sqrt_h,l2h1,\
l1_cauchy,phi_l2_cauchy,grad_l2_cauchy,exact_l1_error";

/// Result of a refinement study: rows written for the levels that completed.
pub struct StudySummary {
    pub rows: usize,
    pub failure: Option<String>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn row(level: usize, o: &RunOutcome, cmp: Option<LevelComparison>) -> String {
    let t = &o.trajectory;
    let r = o.report.as_ref().expect("successful runs carry a report");
    let mut s = String::new();
    let _ = write!(
        s,
        "{level},{},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{},{},{:.16e},{},{},{},{}",
        t.mesh.n_cells(),
        r.h,
        r.dt,
        r.steps,
        r.final_time,
        r.mass_drift,
        cell(r.entropy_worst_violation),
        cell(r.weak_bv_value),
        cell(r.weak_bv_scaled),
        r.l2h1_value,
        cell(cmp.map(|c| c.l1_u)),
        cell(cmp.map(|c| c.l2_phi)),
        cell(cmp.map(|c| c.l2_grad_phi)),
        cell(heat_l1_error(t, &o.problem).ok()),
    );
    s
}

/// Runs `levels` refinements of `config` into `out/level_<i>` and writes
/// `out/study.csv`. The table stops at the first level that failed.
pub fn study(config: &RunConfig, levels: usize, out: &Path) -> Result<StudySummary, CliError> {
    if levels == 0 {
        return Err(CliError::Config("a study needs at least one level".into()));
    }
    for l in 0..levels {
        config.refined(l).setup()?;
    }
    fs::create_dir_all(out)?;
    let outcomes = (0..levels)
        .into_par_iter()
        .map(|l| run(&config.refined(l), &out.join(format!("level_{l}"))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = format!("{HEADER_NOTE}\n{COLUMNS}\n");
    let mut failure = None;
    let mut rows = 0;
    for (l, o) in outcomes.iter().enumerate() {
        if let Some(f) = &o.failure {
            failure = Some(format!("level {l}: {f}"));
            break;
        }
        let cmp = if l > 0 {
            let prev = &outcomes[l - 1];
            Some(compare_levels(&prev.trajectory, &o.trajectory, &o.problem).map_err(|e| CliError::Solve(e.to_string()))?)
        } else {
            None
        };
        table.push_str(&row(l, o, cmp));
        table.push('\n');
        rows += 1;
    }
    fs::write(out.join("study.csv"), table)?;
    Ok(StudySummary { rows, failure })
}
