//! Time stepping for `∂_t u = -∇·(M(u) ∇Δu)` with `M(u) = u^n`.
//!
//! The scheme is written in flux form on the staggered faces of the grid:
//! `u⁺ = u - dt · Div(M_face · Grad(Lap u))`, where `Grad` is the forward
//! face difference and `Div` its (negative) adjoint. Face fluxes telescope,
//! so `Σ u` is conserved up to roundoff on every step.

mod implicit;
pub mod init;

use crate::grid::{laplacian, Field, GridError};
use crate::regularity::{regime_gate, RegimeDecision};
use thiserror::Error;

/// Stability constant of the five-point biharmonic symbol in 2D: the
/// largest eigenvalue of `Lap²` is `64 / h⁴`, so explicit Euler needs
/// `dt ≤ h⁴ / (32 max M)`.
pub const C_STAB_2D: f64 = 32.0;
/// 1D analogue (`Lap²` eigenvalues up to `16 / h⁴`).
pub const C_STAB_1D: f64 = 8.0;

/// Default regularization floor, relative to `max u₀`.
pub const DEFAULT_EPS_FLOOR: f64 = 1e-10;
pub const DEFAULT_DT_SAFETY: f64 = 0.1;
/// Semi-implicit steps are this many times the explicit CFL step.
pub const DEFAULT_IMPLICIT_DT_GAIN: f64 = 4.0;
/// Relative residual for the semi-implicit linear solve.
pub const IMPLICIT_TOLERANCE: f64 = 1e-10;
/// Per-snapshot-interval slack of the energy monotonicity check, times `E(0)`.
pub const ENERGY_MONOTONE_TOL: f64 = 1e-8;
/// Cumulative energy growth, times `E(0)`, beyond which a run is declared diverged.
pub const DIVERGENCE_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("non-finite value produced at t = {time} (cell {cell}); reduce dt_safety")]
    NonFinite { time: f64, cell: usize },
    #[error("energy grew by {growth:e} (> {limit:e} = 1e-3 E(0)) by t = {time}; dt_safety is too large")]
    Diverged { time: f64, growth: f64, limit: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data must be nonnegative (min = {min})")]
    NegativeInitialData { min: f64 },
    #[error("semi-implicit solve stalled after {iterations} iterations (residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },
    #[error(transparent)]
    Regime(#[from] crate::regularity::RegimeError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Mobility exponent and degeneracy floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    pub n: f64,
    /// Absolute floor below which a film height counts as dry.
    pub eps_floor: f64,
    in_regime: bool,
}

impl MobilityModel {
    /// Builds a mobility model; with `strict` the exponent must lie in the
    /// Hölder-regularity range `(2 - √(4/5), 3)`.
    pub fn new(n: f64, eps_floor: f64, strict: bool) -> Result<Self, SolverError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(SolverError::InvalidConfig(format!("mobility exponent n = {n} must be > 0")));
        }
        if !(eps_floor.is_finite() && eps_floor >= 0.0) {
            return Err(SolverError::InvalidConfig(format!("eps_floor = {eps_floor} must be >= 0")));
        }
        let decision = regime_gate(n, strict)?;
        Ok(Self { n, eps_floor, in_regime: decision == RegimeDecision::Accepted })
    }

    /// Same as [`MobilityModel::new`] with the floor given relative to a
    /// reference height (normally `max u₀`).
    pub fn relative(n: f64, eps_rel: f64, reference: f64, strict: bool) -> Result<Self, SolverError> {
        let scale = if reference > 0.0 { reference } else { 1.0 };
        Self::new(n, eps_rel * scale, strict)
    }

    pub fn in_paper_regime(&self) -> bool {
        self.in_regime
    }

    /// `clamp(u, 0)^p`, with `u ≤ eps_floor` raised to `eps_floor^p` when
    /// `p < 1` (keeps negative and sub-unit powers finite at dry cells).
    pub fn power(&self, u: f64, p: f64) -> f64 {
        if p < 1.0 {
            u.max(self.eps_floor).powf(p)
        } else {
            u.max(0.0).powf(p)
        }
    }

    /// `u^n` at a cell, zero on dry cells.
    pub fn cell_mobility(&self, u: f64) -> f64 {
        if u <= self.eps_floor {
            0.0
        } else {
            u.powf(self.n)
        }
    }
}

/// Face mobility: arithmetic mean of the neighbors, clamped at zero, raised
/// to `n`, floored at `eps_floor^n` when either neighbor is dry.
pub fn face_mobility(u_left: f64, u_right: f64, m: &MobilityModel) -> f64 {
    let mean = (0.5 * (u_left + u_right)).max(0.0);
    let value = mean.powf(m.n);
    if u_left <= m.eps_floor || u_right <= m.eps_floor {
        value.max(m.eps_floor.powf(m.n))
    } else {
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub mobility: MobilityModel,
    /// Fraction of the CFL bound. Values above 1 are accepted but unstable.
    pub dt_safety: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub scheme: Scheme,
    /// Semi-implicit step as a multiple of the explicit CFL step.
    pub implicit_dt_gain: f64,
}

impl SolverConfig {
    pub fn new(mobility: MobilityModel, t_end: f64, snapshot_every: f64) -> Self {
        Self {
            mobility,
            dt_safety: DEFAULT_DT_SAFETY,
            t_end,
            snapshot_every,
            scheme: Scheme::Explicit,
            implicit_dt_gain: DEFAULT_IMPLICIT_DT_GAIN,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_dt_safety(mut self, dt_safety: f64) -> Self {
        self.dt_safety = dt_safety;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.dt_safety.is_finite() && self.dt_safety > 0.0) {
            return bad(format!("dt_safety = {} must be > 0", self.dt_safety));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end = {} must be > 0", self.t_end));
        }
        if !(self.snapshot_every.is_finite() && self.snapshot_every > 0.0) {
            return bad(format!("snapshot_every = {} must be > 0", self.snapshot_every));
        }
        if self.snapshot_every > self.t_end {
            return bad(format!(
                "snapshot_every = {} exceeds t_end = {}",
                self.snapshot_every, self.t_end
            ));
        }
        if !(self.implicit_dt_gain.is_finite() && self.implicit_dt_gain > 0.0) {
            return bad(format!("implicit_dt_gain = {} must be > 0", self.implicit_dt_gain));
        }
        Ok(())
    }
}

/// Conserved and dissipated quantities recorded with every snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRecord {
    pub time: f64,
    /// Steps taken since the previous snapshot.
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// `Σ u · cell volume`.
    pub mass: f64,
    /// Face-difference energy `½ Σ |Grad u|²`, the Lyapunov functional of the scheme.
    pub energy: f64,
    /// Smallest film height, to report transient negative undershoots.
    pub min_value: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    snapshots: Vec<Field>,
    records: Vec<SnapshotRecord>,
}

impl Trajectory {
    /// Assembles a trajectory from stored snapshots (e.g. read back from disk).
    pub fn from_snapshots(snapshots: Vec<Field>) -> Result<Self, SolverError> {
        if snapshots.is_empty() {
            return Err(SolverError::InvalidConfig("a trajectory needs at least one snapshot".into()));
        }
        for w in snapshots.windows(2) {
            crate::grid::ensure_same_grid(w[0].grid(), w[1].grid())?;
            if w[1].time() <= w[0].time() {
                return Err(SolverError::InvalidConfig(format!(
                    "snapshot times must increase strictly ({} then {})",
                    w[0].time(),
                    w[1].time()
                )));
            }
        }
        let records = snapshots
            .iter()
            .map(|f| SnapshotRecord {
                time: f.time(),
                steps: 0,
                dt_min: 0.0,
                dt_max: 0.0,
                mass: mass(f),
                energy: scheme_energy(f),
                min_value: f.min(),
            })
            .collect();
        Ok(Self { snapshots, records })
    }

    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn records(&self) -> &[SnapshotRecord] {
        &self.records
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Field::time).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory is never empty")
    }
}

/// `Σ u` times the cell volume.
pub fn mass(u: &Field) -> f64 {
    u.values().iter().sum::<f64>() * u.grid().cell_volume()
}

/// `½ Σ_faces |Grad u|² · cell volume`, which the explicit scheme
/// dissipates exactly for `dt` below the CFL bound.
pub fn scheme_energy(u: &Field) -> f64 {
    let g = u.grid();
    let v = u.values();
    let (nx, ny) = (g.nx(), g.ny());
    let mut sum = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let c = v[g.idx(i, j)];
            let e = v[g.idx((i + 1) % nx, j)] - c;
            sum += e * e;
            if !g.is_1d() {
                let n = v[g.idx(i, (j + 1) % ny)] - c;
                sum += n * n;
            }
        }
    }
    0.5 * sum / (g.h() * g.h()) * g.cell_volume()
}

fn c_stab(u: &Field) -> f64 {
    if u.grid().is_1d() {
        C_STAB_1D
    } else {
        C_STAB_2D
    }
}

/// Face mobilities on east faces (`x`) and north faces (`y`, empty in 1D).
pub(crate) fn face_mobilities(u: &Field, m: &MobilityModel) -> (Vec<f64>, Vec<f64>) {
    let g = u.grid();
    let v = u.values();
    let (nx, ny) = (g.nx(), g.ny());
    let mut mx = vec![0.0; g.len()];
    let mut my = if g.is_1d() { Vec::new() } else { vec![0.0; g.len()] };
    for j in 0..ny {
        for i in 0..nx {
            let k = g.idx(i, j);
            mx[k] = face_mobility(v[k], v[g.idx((i + 1) % nx, j)], m);
            if !g.is_1d() {
                my[k] = face_mobility(v[k], v[g.idx(i, (j + 1) % ny)], m);
            }
        }
    }
    (mx, my)
}

/// `Div(M_face · Grad w)` for face mobilities `(mx, my)`.
pub(crate) fn weighted_div_grad(u: &Field, mx: &[f64], my: &[f64], w: &[f64], out: &mut [f64]) {
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let inv_h2 = 1.0 / (g.h() * g.h());
    for j in 0..ny {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let k = g.idx(i, j);
            let wc = w[k];
            let fe = mx[k] * (w[g.idx(ip, j)] - wc);
            let fw = mx[g.idx(im, j)] * (wc - w[g.idx(im, j)]);
            let mut acc = fe - fw;
            if !g.is_1d() {
                let fnn = my[k] * (w[g.idx(i, jp)] - wc);
                let fs = my[g.idx(i, jm)] * (wc - w[g.idx(i, jm)]);
                acc += fnn - fs;
            }
            out[k] = acc * inv_h2;
        }
    }
}

/// Largest stable explicit step for the current state.
pub fn cfl_dt(u: &Field, cfg: &SolverConfig) -> f64 {
    let (mx, my) = face_mobilities(u, &cfg.mobility);
    let max_m = mx.iter().chain(&my).copied().fold(0.0, f64::max);
    explicit_dt(u, cfg, max_m)
}

fn explicit_dt(u: &Field, cfg: &SolverConfig, max_m: f64) -> f64 {
    if max_m <= 0.0 {
        return f64::INFINITY;
    }
    let h = u.grid().h();
    cfg.dt_safety * h.powi(4) / (c_stab(u) * max_m)
}

/// One step with the CFL step size (times the implicit gain for the
/// semi-implicit scheme). Returns the new state and the step used.
pub fn step(u: &Field, cfg: &SolverConfig) -> Result<(Field, f64), SolverError> {
    step_capped(u, cfg, f64::INFINITY)
}

/// Like [`step`] but never steps further than `dt_cap`.
pub fn step_capped(u: &Field, cfg: &SolverConfig, dt_cap: f64) -> Result<(Field, f64), SolverError> {
    let (mx, my) = face_mobilities(u, &cfg.mobility);
    let max_m = mx.iter().chain(&my).copied().fold(0.0, f64::max);
    let mut dt = explicit_dt(u, cfg, max_m);
    if cfg.scheme == Scheme::SemiImplicit {
        dt *= cfg.implicit_dt_gain;
    }
    dt = dt.min(dt_cap);
    if !dt.is_finite() {
        return Err(SolverError::InvalidConfig(
            "no finite time step: mobility vanishes everywhere and no cap was given".into(),
        ));
    }
    let values = match cfg.scheme {
        Scheme::Explicit => explicit_update(u, &mx, &my, dt),
        Scheme::SemiImplicit => implicit::solve(u, &mx, &my, dt)?,
    };
    let t = u.time() + dt;
    if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite { time: t, cell });
    }
    Ok((Field::from_parts(*u.grid(), values, t), dt))
}

fn explicit_update(u: &Field, mx: &[f64], my: &[f64], dt: f64) -> Vec<f64> {
    let lap = laplacian(u);
    let mut rate = vec![0.0; u.grid().len()];
    weighted_div_grad(u, mx, my, lap.values(), &mut rate);
    // u_t = -Div(M Grad Lap u)
    u.values().iter().zip(&rate).map(|(&v, &r)| v - dt * r).collect()
}

/// Integrates from `u0` to `cfg.t_end`, storing a snapshot at every
/// multiple of `snapshot_every` (steps are shortened to land on them).
pub fn run(u0: &Field, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let min = u0.min();
    if min < 0.0 {
        return Err(SolverError::NegativeInitialData { min });
    }
    let u0 = u0.clone().with_time(0.0);
    let e0 = scheme_energy(&u0);
    let limit = DIVERGENCE_TOL * e0;
    let mut records = vec![SnapshotRecord {
        time: 0.0,
        steps: 0,
        dt_min: 0.0,
        dt_max: 0.0,
        mass: mass(&u0),
        energy: e0,
        min_value: min,
    }];
    let mut snapshots = vec![u0.clone()];

    let n_snap = (cfg.t_end / cfg.snapshot_every * (1.0 + 1e-12)).floor() as usize;
    let mut u = u0;
    let mut energy = e0;
    let mut growth = 0.0;
    for k in 1..=n_snap {
        let target = k as f64 * cfg.snapshot_every;
        let (mut steps, mut dt_min, mut dt_max) = (0usize, f64::INFINITY, 0.0f64);
        while u.time() < target {
            let remaining = target - u.time();
            let (next, dt) = step_capped(&u, cfg, remaining)?;
            steps += 1;
            dt_min = dt_min.min(dt);
            dt_max = dt_max.max(dt);
            // Land exactly on the lattice when the cap was hit.
            u = if dt >= remaining { next.with_time(target) } else { next };
            let e = scheme_energy(&u);
            growth += (e - energy).max(0.0);
            energy = e;
            if growth > limit {
                return Err(SolverError::Diverged { time: u.time(), growth, limit });
            }
        }
        records.push(SnapshotRecord {
            time: u.time(),
            steps,
            dt_min,
            dt_max,
            mass: mass(&u),
            energy,
            min_value: u.min(),
        });
        snapshots.push(u.clone());
    }
    Ok(Trajectory { snapshots, records })
}
