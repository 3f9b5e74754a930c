//! Functionals, averages, classifiers and inequality sides evaluated on
//! grid fields. Everything here is a pure function of its inputs.

mod averages;
pub mod cutoff;
mod hole_filling;
mod inequalities;

pub use averages::{averages_rate, smoothed_averages, tilt_excess, AnnulusAverages, AveragesRate, TiltExcessReport};
pub use hole_filling::{hole_filling_sides, HoleFillingReport};
pub use inequalities::{
    bernis_gruen_sides, morrey_sup_check, poincare_checks, second_derivative_check, third_derivative_check,
};

use crate::grid::{gradient, grad_laplacian, hessian, sup_inf, Field, Grid, GridError, Region};
use thiserror::Error;

/// Film heights at or below `DEFAULT_EPS_REL · max u` count as dry.
pub const DEFAULT_EPS_REL: f64 = 1e-10;
/// A radius is resolvable when it spans at least this many cells.
pub const MIN_RADIUS_CELLS: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("radius {radius} is below the resolvable minimum {min_radius} (8 cells)")]
    RampUnresolved { radius: f64, min_radius: f64 },
    #[error("entropy exponent alpha = {alpha} is outside ({lo}, {hi}) or equal to 0")]
    AlphaOutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("the field is not at a bad time on the ball (sup = {sup}, inf = {inf})")]
    NotBadTime { sup: f64, inf: f64 },
    #[error("need at least 3 snapshots in the time window, found {found}")]
    InsufficientSnapshots { found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl DiagnosticsError {
    /// Smallest radius that would have been accepted, when the error is a
    /// resolution problem.
    pub fn min_radius(&self) -> Option<f64> {
        match self {
            DiagnosticsError::RampUnresolved { min_radius, .. } => Some(*min_radius),
            DiagnosticsError::Grid(GridError::EmptyRegion { h, .. }) => Some(MIN_RADIUS_CELLS * h),
            _ => None,
        }
    }
}

pub fn min_resolvable_radius(grid: &Grid) -> f64 {
    MIN_RADIUS_CELLS * grid.h()
}

pub(crate) fn check_resolvable(grid: &Grid, r: f64) -> Result<(), DiagnosticsError> {
    let min_radius = min_resolvable_radius(grid);
    // Tolerate radii computed as (8h)(1 - ulp).
    if !(r.is_finite() && r >= min_radius * (1.0 - 1e-12)) {
        return Err(DiagnosticsError::RampUnresolved { radius: r, min_radius });
    }
    Ok(())
}

/// Absolute dryness floor used by the diagnostics for this field.
pub fn default_floor(u: &Field) -> f64 {
    DEFAULT_EPS_REL * u.max().max(0.0)
}

/// `u^p` with `u` clamped at `eps` for exponents below one and at zero otherwise.
pub(crate) fn pow_floor(u: f64, p: f64, eps: f64) -> f64 {
    if p < 1.0 {
        if u <= 0.0 && eps == 0.0 {
            // Fully dry field: nothing to measure.
            return 0.0;
        }
        u.max(eps).powf(p)
    } else {
        u.max(0.0).powf(p)
    }
}

pub(crate) fn power_field(u: &Field, p: f64, eps: f64) -> Field {
    u.map(|v| pow_floor(v, p, eps))
}

/// Both sides of a functional inequality `lhs ≤ C · Σ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub lhs_components: Vec<(String, f64)>,
    pub rhs_components: Vec<(String, f64)>,
    /// `lhs / Σ rhs`; 0 when `lhs = 0`, infinite when only the rhs vanishes.
    pub ratio: f64,
}

impl InequalityCheck {
    pub fn new(name: &str, lhs_components: Vec<(&str, f64)>, rhs_components: Vec<(&str, f64)>) -> Self {
        let lhs: f64 = lhs_components.iter().map(|(_, v)| v).sum();
        let rhs: f64 = rhs_components.iter().map(|(_, v)| v).sum();
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            f64::INFINITY
        };
        let own = |v: Vec<(&str, f64)>| v.into_iter().map(|(k, x)| (k.to_string(), x)).collect();
        Self { name: name.to_string(), lhs, lhs_components: own(lhs_components), rhs_components: own(rhs_components), ratio }
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_components.iter().map(|(_, v)| v).sum()
    }

    pub fn rhs_component(&self, name: &str) -> Option<f64> {
        self.rhs_components.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn lhs_component(&self, name: &str) -> Option<f64> {
        self.lhs_components.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeLabel {
    Good,
    Bad,
}

impl std::fmt::Display for TimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TimeLabel::Good => "Good",
            TimeLabel::Bad => "Bad",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeClass {
    pub label: TimeLabel,
    pub sup: f64,
    pub inf: f64,
    pub region: Region,
}

/// Good iff `sup ≤ 2 inf` over the member cells (equality counts as good).
pub fn classify_time(u: &Field, region: &Region) -> Result<TimeClass, DiagnosticsError> {
    let (sup, inf) = sup_inf(u, region)?;
    let label = if sup <= 2.0 * inf { TimeLabel::Good } else { TimeLabel::Bad };
    Ok(TimeClass { label, sup, inf, region: *region })
}

/// `∫_R ½|∇u|²` with centered differences.
pub fn energy(u: &Field, region: &Region) -> Result<f64, DiagnosticsError> {
    let g = gradient(u);
    Ok(0.5 * region.integrate_with(u.grid(), |k, _| g.norm_sq(k))?)
}

/// `∫_R uⁿ |∇Δu|²` over the wet set `u > eps` with the default floor.
pub fn dissipation(u: &Field, n: f64, region: &Region) -> Result<f64, DiagnosticsError> {
    dissipation_with_floor(u, n, region, default_floor(u))
}

pub fn dissipation_with_floor(u: &Field, n: f64, region: &Region, eps: f64) -> Result<f64, DiagnosticsError> {
    let gl = grad_laplacian(u);
    let v = u.values();
    Ok(region.integrate_with(u.grid(), |k, _| wet_mobility(v[k], n, eps) * gl.norm_sq(k))?)
}

/// `uⁿ` on wet cells, zero on dry ones.
pub(crate) fn wet_mobility(u: f64, n: f64, eps: f64) -> f64 {
    if u > eps && u > 0.0 {
        u.powf(n)
    } else {
        0.0
    }
}

/// Admissible entropy exponents `(max(−1, ½ − n), 2 − n)`, with 0 excluded.
pub fn entropy_alpha_range(n: f64) -> (f64, f64) {
    ((-1.0f64).max(0.5 - n), 2.0 - n)
}

/// A representative admissible exponent: the midpoint of the negative part
/// of the range when it has one, else the midpoint of the range; NaN when
/// the range is empty.
pub fn default_entropy_alpha(n: f64) -> f64 {
    let (lo, hi) = entropy_alpha_range(n);
    if lo >= hi {
        f64::NAN
    } else if lo < 0.0 {
        0.5 * (lo + hi.min(0.0))
    } else {
        0.5 * (lo + hi)
    }
}

fn check_alpha(alpha: f64, lo: f64, hi: f64) -> Result<(), DiagnosticsError> {
    if !(alpha > lo && alpha < hi) || alpha == 0.0 {
        return Err(DiagnosticsError::AlphaOutOfRange { alpha, lo, hi });
    }
    Ok(())
}

/// `∫ u^{1+α} / (α(1+α))` over the whole domain. Requires `α > −1`, `α ≠ 0`.
pub fn entropy(u: &Field, alpha: f64) -> Result<f64, DiagnosticsError> {
    check_alpha(alpha, -1.0, f64::INFINITY)?;
    let eps = default_floor(u);
    let p = 1.0 + alpha;
    let s: f64 = u.values().iter().map(|&v| pow_floor(v, p, eps)).sum();
    Ok(s * u.grid().cell_volume() / (alpha * (1.0 + alpha)))
}

/// `∫ |D²u^{(n+α+1)/2}|² + |∇u^{(n+α+1)/4}|⁴` over the whole domain, for
/// `α` in the admissible range of `n`.
pub fn entropy_dissipation_rhs(u: &Field, n: f64, alpha: f64) -> Result<f64, DiagnosticsError> {
    let (lo, hi) = entropy_alpha_range(n);
    check_alpha(alpha, lo, hi)?;
    let eps = default_floor(u);
    let m = n + alpha + 1.0;
    let d2 = hessian(&power_field(u, 0.5 * m, eps));
    let g1 = gradient(&power_field(u, 0.25 * m, eps));
    Ok(Region::Whole.integrate_with(u.grid(), |k, _| {
        let q = g1.norm_sq(k);
        d2.norm_sq(k) + q * q
    })?)
}

/// `(∫ |∇u|³)^{1/3}` over the whole domain.
pub fn l3_gradient_norm(u: &Field) -> f64 {
    let g = gradient(u);
    let s: f64 = (0..u.grid().len()).map(|k| g.norm_sq(k).powf(1.5)).sum();
    (s * u.grid().cell_volume()).cbrt()
}
