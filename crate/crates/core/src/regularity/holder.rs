//! Empirical Hölder exponents in space and time.
//!
//! The spatial exponent is read off the modulus of continuity: for each
//! sampled separation `d` the largest increment `ω(d) = max |u(x+d) − u(x)|`
//! is recorded, and `ln ω` is regressed on `ln d`. The seminorm curve
//! `σ ↦ max |Δu| / (d/L)^σ` is returned alongside for inspection.

use super::RegularityError;
use crate::diagnostics::cutoff::CutoffProfile;
use crate::diagnostics::dissipation;
use crate::grid::{Field, GridError, Region};
use crate::solver::Trajectory;

/// Upper bound on the number of sampled point pairs.
pub const MAX_PAIRS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub sigma_x: f64,
    pub sigma_t: f64,
    /// The maximized quotient at the selected exponent.
    pub seminorm: f64,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialHolder {
    pub estimate: HolderEstimate,
    /// `(σ, seminorm(σ))` for every candidate.
    pub curve: Vec<(f64, f64)>,
    /// Slope of the log-log modulus fit before snapping to a candidate.
    pub fitted_slope: f64,
    /// `(d / L, ω(d))` per sampled separation.
    pub modulus: Vec<(f64, f64)>,
}

/// Temporal exponent implied by a spatial one, `σ_x / (2(σ_x + d + 1))`.
pub fn theoretical_sigma_t(sigma_x: f64, d: usize) -> f64 {
    sigma_x / (2.0 * (sigma_x + d as f64 + 1.0))
}

fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn snap_to_candidate(slope: f64, candidates: &[f64]) -> f64 {
    let clamped = slope.clamp(f64::MIN_POSITIVE, 1.0);
    let best = candidates
        .iter()
        .copied()
        .filter(|s| *s > 0.0 && *s <= 1.0)
        .min_by(|a, b| (a - clamped).abs().total_cmp(&(b - clamped).abs()));
    best.unwrap_or(clamped)
}

/// Offsets with length in `[2h, L/4]`, one per separation class up to sign,
/// sorted by length.
fn offsets(u: &Field) -> Vec<(i64, i64, f64)> {
    let g = u.grid();
    let h = g.h();
    let max_cells = (g.length() / 4.0 / h).floor() as i64;
    let mut out = Vec::new();
    let jr = if g.is_1d() { 0 } else { max_cells };
    for dj in 0..=jr {
        for di in -max_cells..=max_cells {
            // Half plane: a pair and its reverse give the same increment.
            if dj == 0 && di <= 0 {
                continue;
            }
            let d = h * ((di * di + dj * dj) as f64).sqrt();
            if d >= 2.0 * h * (1.0 - 1e-12) && d <= g.length() / 4.0 * (1.0 + 1e-12) {
                out.push((di, dj, d));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)).then(a.0.cmp(&b.0)));
    out
}

/// Fewest separations kept before anchors are thinned as well.
const MIN_OFFSETS: usize = 12;

/// All offsets when `anchors × offsets ≤ MAX_PAIRS`, otherwise a strided
/// ladder through the length-sorted list with geometric spacing. Anchors are
/// kept whole as long as possible: the sup over anchors is what finds a cusp.
fn ladder(all: Vec<(i64, i64, f64)>, anchors: usize) -> Vec<(i64, i64, f64)> {
    let n = all.len();
    let budget = (MAX_PAIRS / anchors.max(1)).max(MIN_OFFSETS);
    if n <= budget {
        return all;
    }
    let mut out = Vec::with_capacity(budget);
    let mut next = 0usize;
    for i in 1..=budget {
        let target = ((n as f64).powf(i as f64 / budget as f64).ceil() as usize).saturating_sub(1);
        let idx = target.max(next);
        if idx >= n {
            break;
        }
        out.push(all[idx]);
        next = idx + 1;
    }
    out
}

/// Estimates the spatial Hölder exponent of `u`, optionally restricted to
/// pairs with both points inside `window`.
pub fn spatial_holder(u: &Field, candidates: &[f64], window: Option<&Region>) -> Result<SpatialHolder, GridError> {
    let g = *u.grid();
    let v = u.values();
    let anchors: Vec<(usize, [f64; 2])> = match window {
        Some(w) => w.members(&g)?.into_iter().map(|m| (m.index, m.offset)).collect(),
        None => (0..g.len()).map(|k| (k, [0.0, 0.0])).collect(),
    };
    let in_window = |off: [f64; 2]| match window {
        Some(Region::Ball { radius, .. }) => off[0] * off[0] + off[1] * off[1] <= radius * radius,
        Some(Region::Annulus { r_in, r_out, .. }) => {
            let d2 = off[0] * off[0] + off[1] * off[1];
            d2 > r_in * r_in && d2 <= r_out * r_out
        }
        _ => true,
    };
    let offs = ladder(offsets(u), anchors.len());
    let stride = (anchors.len() * offs.len()).div_ceil(MAX_PAIRS).max(1);

    let h = g.h();
    let l = g.length();
    let mut modulus: Vec<(f64, f64)> = Vec::new();
    let mut increments: Vec<(f64, f64)> = Vec::new();
    let mut pair_count = 0usize;
    let mut last_d = f64::NAN;
    for &(di, dj, d) in &offs {
        let mut best = 0.0f64;
        let mut any = false;
        for (idx, &(k, off)) in anchors.iter().enumerate() {
            if stride > 1 && idx % stride != 0 {
                continue;
            }
            let other_off = [off[0] + di as f64 * h, off[1] + dj as f64 * h];
            if !in_window(other_off) {
                continue;
            }
            let (i, j) = ((k % g.nx()) as i64, (k / g.nx()) as i64);
            let kk = g.wrapped_idx(i + di, j + dj);
            best = best.max((v[kk] - v[k]).abs());
            any = true;
            pair_count += 1;
        }
        if !any {
            continue;
        }
        let dn = d / l;
        if dn == last_d {
            let last = modulus.last_mut().expect("nonempty");
            last.1 = last.1.max(best);
        } else {
            modulus.push((dn, best));
            last_d = dn;
        }
        increments.push((dn, best));
    }

    // ω(d) is a sup over |x − y| ≤ d and cannot decrease; the running max
    // also recovers separations whose extremal pair the stride dropped.
    let mut envelope = 0.0f64;
    for p in modulus.iter_mut() {
        envelope = envelope.max(p.1);
        p.1 = envelope;
    }

    let curve: Vec<(f64, f64)> = candidates
        .iter()
        .map(|&s| (s, increments.iter().map(|&(dn, w)| w / dn.powf(s)).fold(0.0, f64::max)))
        .collect();
    let fitted_slope = ls_slope(&modulus).unwrap_or(1.0);
    let all_zero = modulus.iter().all(|p| p.1 == 0.0);
    let sigma_x = if all_zero { 1.0 } else { snap_to_candidate(fitted_slope, candidates) };
    let seminorm = increments.iter().map(|&(dn, w)| w / dn.powf(sigma_x)).fold(0.0, f64::max);
    let d = if g.is_1d() { 1 } else { 2 };
    Ok(SpatialHolder {
        estimate: HolderEstimate { sigma_x, sigma_t: theoretical_sigma_t(sigma_x, d), seminorm, pair_count },
        curve,
        fitted_slope,
        modulus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedDifference {
    pub r: f64,
    pub t1: f64,
    pub t2: f64,
    /// `|ū_r(t2) − ū_r(t1)|` with `ū_r = ∫η_r u`, `η_r` the unit-mass ball cutoff.
    pub difference: f64,
    /// `|t2 − t1|^{1/2} r^{−d−1} (∫_{t1}^{t2}∫uⁿ|∇Δu|²)^{1/2}`.
    pub flux_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalHolder {
    /// `sigma_t` holds the empirical exponent.
    pub estimate: HolderEstimate,
    pub theoretical_sigma_t: f64,
    /// `(τ, max |u(x, t + τ) − u(x, t)|)` per snapshot lag.
    pub modulus: Vec<(f64, f64)>,
    pub mollified: Vec<MollifiedDifference>,
}

fn mollified_value(u: &Field, x: [f64; 2], r: f64) -> Result<f64, GridError> {
    let cut = CutoffProfile::ball(r / 2.0, x);
    let region = Region::ball(x, r);
    let v = u.values();
    let mut mass = 0.0;
    let mut acc = 0.0;
    for m in region.members(u.grid())? {
        let w = cut.value(m.offset);
        mass += w;
        acc += w * v[m.index];
    }
    Ok(acc / mass)
}

/// Temporal Hölder exponent at the cell nearest `x`, from the largest
/// increment per snapshot lag, next to the exponent `σ_x/(2(σ_x + d + 1))`
/// implied by `sigma_x`.
pub fn temporal_holder(
    traj: &Trajectory,
    n: f64,
    x: [f64; 2],
    r_grid: &[f64],
    sigma_x: f64,
) -> Result<TemporalHolder, RegularityError> {
    let snaps = traj.snapshots();
    if snaps.len() < 3 {
        return Err(RegularityError::InsufficientSnapshots { found: snaps.len() });
    }
    let g = *snaps[0].grid();
    let h = g.h();
    let i = ((x[0] / h).round() as i64).rem_euclid(g.nx() as i64);
    let j = if g.is_1d() { 0 } else { ((x[1] / h).round() as i64).rem_euclid(g.ny() as i64) };
    let k = g.wrapped_idx(i, j);
    let times: Vec<f64> = snaps.iter().map(Field::time).collect();
    let point: Vec<f64> = snaps.iter().map(|f| f.values()[k]).collect();

    let mut modulus = Vec::new();
    let mut pair_count = 0;
    for lag in 1..snaps.len() {
        let mut best = 0.0f64;
        let mut tau = 0.0f64;
        for a in 0..snaps.len() - lag {
            best = best.max((point[a + lag] - point[a]).abs());
            tau = tau.max(times[a + lag] - times[a]);
            pair_count += 1;
        }
        modulus.push((tau, best));
    }
    let all_zero = modulus.iter().all(|p| p.1 == 0.0);
    let exponent = if all_zero { 1.0 } else { ls_slope(&modulus).unwrap_or(1.0).clamp(f64::MIN_POSITIVE, 1.0) };
    let seminorm = modulus
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|&(tau, w)| w / tau.powf(exponent))
        .fold(0.0, f64::max);

    // Dissipation per snapshot, integrated by the trapezoid rule.
    let diss = snaps
        .iter()
        .map(|f| dissipation(f, n, &Region::Whole))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cumulative = vec![0.0; snaps.len()];
    for a in 1..snaps.len() {
        cumulative[a] = cumulative[a - 1] + 0.5 * (diss[a] + diss[a - 1]) * (times[a] - times[a - 1]);
    }
    let d = if g.is_1d() { 1 } else { 2 };
    let mut mollified = Vec::new();
    for &r in r_grid {
        let vals = snaps.iter().map(|f| mollified_value(f, x, r)).collect::<Result<Vec<_>, _>>()?;
        for a in 0..snaps.len() {
            for b in a + 1..snaps.len() {
                let dt = times[b] - times[a];
                mollified.push(MollifiedDifference {
                    r,
                    t1: times[a],
                    t2: times[b],
                    difference: (vals[b] - vals[a]).abs(),
                    flux_bound: dt.sqrt() * r.powi(-(d + 1)) * (cumulative[b] - cumulative[a]).max(0.0).sqrt(),
                });
            }
        }
    }
    Ok(TemporalHolder {
        estimate: HolderEstimate { sigma_x, sigma_t: exponent, seminorm, pair_count },
        theoretical_sigma_t: theoretical_sigma_t(sigma_x, d as usize),
        modulus,
        mollified,
    })
}
