use crate::{exit, Failure};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;
use thinfilm::diagnostics::cutoff::CutoffProfile;
use thinfilm::diagnostics::{
    bernis_gruen_sides, morrey_sup_check, poincare_checks, second_derivative_check, smoothed_averages,
    third_derivative_check, tilt_excess, DiagnosticsError, InequalityCheck,
};
use thinfilm::grid::Field;
use thinfilm::io::{format_float, read_snapshot};

/// Inner-ball fraction of the sup bound.
pub const MORREY_DELTA: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct DiagnoseArgs {
    pub snapshot: PathBuf,
    /// Defaults to the domain center.
    pub center: Option<[f64; 2]>,
    /// Defaults to `L/8`.
    pub radius: Option<f64>,
    pub all: bool,
}

#[derive(Clone, Copy)]
enum Job {
    BernisGruen,
    TiltExcess,
    Poincare,
    Third,
    Second,
    Morrey,
}

type Rows = Vec<(String, String, f64)>;

fn check_rows(c: &InequalityCheck) -> Rows {
    let mut rows: Rows = c.lhs_components.iter().map(|(k, v)| (c.name.clone(), format!("lhs:{k}"), *v)).collect();
    rows.extend(c.rhs_components.iter().map(|(k, v)| (c.name.clone(), format!("rhs:{k}"), *v)));
    rows.push((c.name.clone(), "ratio".into(), c.ratio));
    rows
}

fn evaluate(job: Job, u: &Field, n: f64, r: f64, center: [f64; 2]) -> Result<Rows, DiagnosticsError> {
    let ball = CutoffProfile::ball(r, center);
    Ok(match job {
        Job::BernisGruen => check_rows(&bernis_gruen_sides(u, n, &ball)?),
        Job::TiltExcess => {
            let av = smoothed_averages(u, r, center)?;
            let t = tilt_excess(u, r, &av, center)?;
            let name = || "tilt_excess".to_string();
            vec![
                (name(), "value".into(), t.value),
                (name(), "b_xx".into(), t.b[0][0]),
                (name(), "b_xy".into(), t.b[0][1]),
                (name(), "b_yx".into(), t.b[1][0]),
                (name(), "b_yy".into(), t.b[1][1]),
                (name(), "c_x".into(), t.c[0]),
                (name(), "c_y".into(), t.c[1]),
            ]
        }
        Job::Poincare => poincare_checks(u, r, center)?.iter().flat_map(check_rows).collect(),
        Job::Third => check_rows(&third_derivative_check(u, r, center)?),
        Job::Second => check_rows(&second_derivative_check(u, n, &ball)?),
        // Only meaningful at a bad time; a good time contributes no rows.
        Job::Morrey => match morrey_sup_check(u, n, r, MORREY_DELTA, center) {
            Ok(c) => check_rows(&c),
            Err(DiagnosticsError::NotBadTime { .. }) => Vec::new(),
            Err(e) => return Err(e),
        },
    })
}

/// CSV fragment `check,term,value` in a fixed check order.
pub fn diagnose(args: &DiagnoseArgs) -> Result<String, Failure> {
    let snap = read_snapshot(&args.snapshot).map_err(|e| Failure::new(exit::FAILED, e.to_string()))?;
    let u = &snap.field;
    let g = u.grid();
    let center = args.center.unwrap_or_else(|| g.domain_center());
    let r = args.radius.unwrap_or(g.length() / 8.0);
    if !(r.is_finite() && r > 0.0) {
        return Err(Failure::new(exit::USAGE, format!("radius {r} must be positive")));
    }
    let mut jobs = vec![Job::BernisGruen, Job::TiltExcess];
    if args.all {
        jobs.extend([Job::Poincare, Job::Third, Job::Second, Job::Morrey]);
    }
    let parts = jobs
        .par_iter()
        .map(|&job| evaluate(job, u, snap.n_exponent, r, center))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| match e.min_radius() {
            Some(min) => Failure::new(
                exit::REGION,
                format!("{e}; the smallest resolvable radius on this grid is {min}"),
            ),
            None => Failure::new(exit::FAILED, e.to_string()),
        })?;
    let mut out = String::from("check,term,value\n");
    for (check, term, v) in parts.into_iter().flatten() {
        let _ = writeln!(out, "{check},{term},{}", format_float(v));
    }
    Ok(out)
}
