//! Raw ingredients of the hole-filling estimate over a time window.

use super::averages::{smoothed_averages, tilt_excess};
use super::{classify_time, default_floor, pow_floor, power_field, wet_mobility, DiagnosticsError, TimeLabel};
use crate::grid::{grad_laplacian, gradient, third_derivatives, Field, Region};
use crate::solver::Trajectory;

/// Every term of the hole-filling inequality, left unweighted so that a
/// caller can look for constants `(C_good, C_bad, θ)` across experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleFillingReport {
    pub t1: f64,
    pub t2: f64,
    pub r: f64,
    pub delta: f64,
    /// Tilt-excess on `B_δr` at `t2`, reference `(b_r, c_r)(t2)`.
    pub excess_inner_t2: f64,
    /// Tilt-excess on `B_2r` at `t1`, reference `(b_r, c_r)(t1)`.
    pub excess_outer_t1: f64,
    /// `∫ χ_good ∫_{B_δr} uⁿ|∇Δu|² + uⁿ|D³u|² dt`, classification on `B_δr`.
    pub good_inner: f64,
    /// Same on `B_2r`.
    pub good_outer: f64,
    /// `∫ χ_bad ∫_{B_δr} uⁿ|∇Δu|² + |∇u^{(n+2)/6}|⁶ dt`, classification on `B_δr`.
    pub bad_inner: f64,
    /// Same on `B_2r`.
    pub bad_outer: f64,
    pub snapshots_used: usize,
}

/// `(good integrand, bad integrand, label)` for one snapshot and ball.
fn bulk_terms(u: &Field, n: f64, ball: &Region) -> Result<(f64, f64, TimeLabel), DiagnosticsError> {
    let g = u.grid();
    let eps = default_floor(u);
    let gl = grad_laplacian(u);
    let d3 = third_derivatives(u);
    let gv = gradient(&power_field(u, (n + 2.0) / 6.0, eps));
    let v = u.values();
    let diss = ball.integrate_with(g, |k, _| wet_mobility(v[k], n, eps) * gl.norm_sq(k))?;
    let d3_term = ball.integrate_with(g, |k, _| pow_floor(v[k], n, eps) * d3.norm_sq(k))?;
    let p6 = ball.integrate_with(g, |k, _| gv.norm_sq(k).powi(3))?;
    let label = classify_time(u, ball)?.label;
    Ok((diss + d3_term, diss + p6, label))
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0])).sum()
}

fn snapshot_at(traj: &Trajectory, t: f64) -> Result<usize, DiagnosticsError> {
    let times = traj.times();
    let tol = 1e-12 * times.last().copied().unwrap_or(1.0).abs().max(1e-300);
    times
        .iter()
        .position(|&s| (s - t).abs() <= tol)
        .ok_or_else(|| DiagnosticsError::InvalidArgument(format!("t = {t} is not a snapshot time")))
}

pub fn hole_filling_sides(
    traj: &Trajectory,
    n: f64,
    t1: f64,
    t2: f64,
    r: f64,
    delta: f64,
    center: [f64; 2],
) -> Result<HoleFillingReport, DiagnosticsError> {
    if !(t1 < t2) {
        return Err(DiagnosticsError::InvalidArgument(format!("need t1 < t2 (got {t1}, {t2})")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(DiagnosticsError::InvalidArgument(format!("delta = {delta} must lie in (0, 1]")));
    }
    let i1 = snapshot_at(traj, t1)?;
    let i2 = snapshot_at(traj, t2)?;
    let window = &traj.snapshots()[i1..=i2];
    if window.len() < 3 {
        return Err(DiagnosticsError::InsufficientSnapshots { found: window.len() });
    }
    let u1 = &window[0];
    let u2 = &window[window.len() - 1];
    let ref2 = smoothed_averages(u2, r, center)?;
    let ref1 = smoothed_averages(u1, r, center)?;
    let excess_inner_t2 = tilt_excess(u2, delta * r, &ref2, center)?.value;
    let excess_outer_t1 = tilt_excess(u1, 2.0 * r, &ref1, center)?.value;

    let inner = Region::ball(center, delta * r);
    let outer = Region::ball(center, 2.0 * r);
    let times: Vec<f64> = window.iter().map(Field::time).collect();
    let mut series = [vec![], vec![], vec![], vec![]];
    for u in window {
        let (gi, bi, li) = bulk_terms(u, n, &inner)?;
        let (go, bo, lo) = bulk_terms(u, n, &outer)?;
        let good = |l: TimeLabel| if l == TimeLabel::Good { 1.0 } else { 0.0 };
        series[0].push(good(li) * gi);
        series[1].push(good(lo) * go);
        series[2].push((1.0 - good(li)) * bi);
        series[3].push((1.0 - good(lo)) * bo);
    }
    Ok(HoleFillingReport {
        t1,
        t2,
        r,
        delta,
        excess_inner_t2,
        excess_outer_t1,
        good_inner: trapezoid(&times, &series[0]),
        good_outer: trapezoid(&times, &series[1]),
        bad_inner: trapezoid(&times, &series[2]),
        bad_outer: trapezoid(&times, &series[3]),
        snapshots_used: window.len(),
    })
}
