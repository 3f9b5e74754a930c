use crate::{exit, Failure};
use rayon::prelude::*;
use std::path::Path;
use thinfilm::io::{load_config, write_snapshot, DiagnosticsRow, DiagnosticsTable};
use thinfilm::solver::{self, SolverError};

pub fn snapshot_name(k: usize) -> String {
    format!("snap_{k:06}.tflm")
}

pub fn run(config: &Path, out: &Path) -> Result<String, Failure> {
    let cfg = load_config(config).map_err(|e| Failure::new(exit::CONFIG, format!("config {}: {e}", config.display())))?;
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::new(exit::FAILED, format!("cannot create output directory {}: {e}", out.display())))?;

    let traj = solver::run(&cfg.initial_field(), &cfg.solver_config()).map_err(|e| {
        let code = match e {
            SolverError::Diverged { .. } | SolverError::NonFinite { .. } => exit::DIVERGED,
            SolverError::InvalidConfig(_) | SolverError::NegativeInitialData { .. } | SolverError::Regime(_) => {
                exit::CONFIG
            }
            _ => exit::FAILED,
        };
        Failure::new(code, e.to_string())
    })?;

    let n = cfg.n_exponent;
    let snaps = traj.snapshots();
    snaps
        .par_iter()
        .enumerate()
        .try_for_each(|(k, f)| write_snapshot(f, n, &out.join(snapshot_name(k))))
        .map_err(|e| Failure::new(exit::FAILED, e.to_string()))?;

    let rows = snaps
        .par_iter()
        .map(|f| DiagnosticsRow::compute(f, n, cfg.center, cfg.schedule.as_ref()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::new(exit::FAILED, format!("diagnostics: {e}")))?;
    let mut table = DiagnosticsTable::new(cfg.schedule.map_or(0, |s| s.levels + 1));
    for row in rows {
        table.append_row(row).map_err(|e| Failure::new(exit::FAILED, e.to_string()))?;
    }
    let csv = out.join("diagnostics.csv");
    table.write(&csv).map_err(|e| Failure::new(exit::FAILED, e.to_string()))?;

    let last = traj.records().last().expect("trajectory is never empty");
    Ok(format!(
        "wrote {} snapshots and {} (t = {}, mass = {}, energy = {})\n",
        snaps.len(),
        csv.display(),
        last.time,
        last.mass,
        last.energy
    ))
}
