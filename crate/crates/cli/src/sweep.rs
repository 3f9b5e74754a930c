use crate::{exit, Failure};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thinfilm::diagnostics::DiagnosticsError;
use thinfilm::grid::{Field, Region};
use thinfilm::io::{format_float, read_snapshot};
use thinfilm::regularity::{excess_sweep_field, gradient_energy, RadiusSchedule, RegularityError};
use thinfilm::solver::Trajectory;

/// Excess below this fraction of `∫_{B_r}|∇u|²` is written as an exact zero.
/// On quadratics the quadrature error of the averages leaves up to ~4e-5 at
/// r = 8h; smooth non-polynomial fields sit above 1e-2.
pub const ZERO_EXCESS_REL: f64 = 1e-3;

pub const SWEEP_HEADER: &str = "t,level,r,excess,class";

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub traj: PathBuf,
    pub center: [f64; 2],
    pub r_min: f64,
    pub r_max: f64,
    pub lambda: f64,
    pub out: PathBuf,
}

fn snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Failure::new(exit::FAILED, format!("cannot read trajectory directory {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tflm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::new(exit::FAILED, format!("no .tflm snapshots in {}", dir.display())));
    }
    Ok(paths)
}

fn region_failure(e: RegularityError) -> Failure {
    let min = match &e {
        RegularityError::Diagnostics(d) => d.min_radius(),
        RegularityError::Grid(g) => DiagnosticsError::Grid(g.clone()).min_radius(),
        _ => None,
    };
    match (&e, min) {
        (RegularityError::Schedule(_), _) => Failure::new(exit::REGION, e.to_string()),
        (_, Some(m)) => Failure::new(exit::REGION, format!("{e}; the smallest resolvable radius is {m}")),
        _ => Failure::new(exit::FAILED, e.to_string()),
    }
}

fn sweep_one(u: &Field, center: [f64; 2], sched: &RadiusSchedule) -> Result<Vec<(f64, f64, String)>, RegularityError> {
    excess_sweep_field(u, center, sched)?
        .into_iter()
        .map(|l| {
            let scale = gradient_energy(u, &Region::ball(center, l.r))?;
            let e = if l.excess.value <= ZERO_EXCESS_REL * scale { 0.0 } else { l.excess.value };
            Ok((l.r, e, l.class.label.to_string()))
        })
        .collect()
}

/// Writes the long-format CSV and reports the snapshots whose excess
/// vanishes on every level.
pub fn sweep(args: &SweepArgs) -> Result<String, Failure> {
    let paths = snapshot_paths(&args.traj)?;
    let snaps = paths
        .par_iter()
        .map(|p| read_snapshot(p).map(|s| s.field))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::new(exit::FAILED, e.to_string()))?;
    let traj = Trajectory::from_snapshots(snaps).map_err(|e| Failure::new(exit::FAILED, e.to_string()))?;
    let sched = RadiusSchedule::new(traj.last().grid(), args.r_min, args.r_max, args.lambda).map_err(region_failure)?;

    let levels = traj
        .snapshots()
        .par_iter()
        .map(|u| sweep_one(u, args.center, &sched))
        .collect::<Result<Vec<_>, _>>()
        .map_err(region_failure)?;

    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut report = String::new();
    for (u, rows) in traj.snapshots().iter().zip(&levels) {
        let t = format_float(u.time());
        for (k, (r, e, class)) in rows.iter().enumerate() {
            let _ = writeln!(csv, "{t},{k},{},{},{class}", format_float(*r), format_float(*e));
        }
        if rows.iter().all(|row| row.1 == 0.0) {
            let _ = writeln!(report, "t = {t}: super-polynomial (zero excess on every level)");
        }
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| Failure::new(exit::FAILED, format!("cannot write {}: {e}", args.out.display())))?;
    let _ = writeln!(
        report,
        "wrote {} levels x {} snapshots to {}",
        sched.levels + 1,
        traj.len(),
        args.out.display()
    );
    Ok(report)
}
