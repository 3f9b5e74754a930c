//! Periodic uniform grids, grid functions and the finite-difference
//! operators every diagnostic is built from.
//!
//! Cell `i` has its center at `x_i = i * h`, so the domain is `[0, L)` in
//! each direction with periodic wrap. A grid with `ny == 1` is a 1D grid;
//! all `y` derivatives vanish there and quadrature uses `h` instead of `h²`.
//!
//! All stencils are second-order centered differences and are exact on
//! quadratic data away from the periodic seam.

use thiserror::Error;

/// Smallest admissible number of cells per direction.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("region {region} contains no cell centers (grid spacing h = {h})")]
    EmptyRegion { region: String, h: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    length: f64,
    h: f64,
}

impl Grid {
    /// Square 2D grid with `n x n` cells on a torus of side `length`.
    pub fn square(n: usize, length: f64) -> Result<Self, GridError> {
        Self::new(n, n, length)
    }

    /// 1D periodic grid with `n` cells.
    pub fn line(n: usize, length: f64) -> Result<Self, GridError> {
        Self::new(n, 1, length)
    }

    pub fn new(nx: usize, ny: usize, length: f64) -> Result<Self, GridError> {
        if nx < MIN_CELLS {
            return Err(GridError::InvalidGrid(format!(
                "nx = {nx} but at least {MIN_CELLS} cells are required"
            )));
        }
        if ny != 1 && ny != nx {
            return Err(GridError::InvalidGrid(format!(
                "ny = {ny}: cells must be square (ny = nx) or the grid 1D (ny = 1)"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(GridError::InvalidGrid(format!(
                "domain length {length} must be positive and finite"
            )));
        }
        Ok(Self { nx, ny, length, h: length / nx as f64 })
    }

    /// Grid with spacing exactly `h` (as stored in a snapshot header).
    pub fn with_spacing(nx: usize, ny: usize, h: f64) -> Result<Self, GridError> {
        let mut g = Self::new(nx, ny, nx as f64 * h)?;
        g.h = h;
        Ok(g)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of a single cell: `h²` in 2D, `h` in 1D.
    pub fn cell_volume(&self) -> f64 {
        if self.is_1d() {
            self.h
        } else {
            self.h * self.h
        }
    }

    /// Flat row-major index of cell `(i, j)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Flat index for possibly out-of-range (periodically wrapped) indices.
    #[inline]
    pub fn wrapped_idx(&self, i: i64, j: i64) -> usize {
        let i = i.rem_euclid(self.nx as i64) as usize;
        let j = j.rem_euclid(self.ny as i64) as usize;
        self.idx(i, j)
    }

    /// Physical coordinates of the center of cell `(i, j)`.
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let y = if self.is_1d() { 0.0 } else { j as f64 * self.h };
        [i as f64 * self.h, y]
    }

    /// Center of the domain, a cell center whenever `nx` is even.
    pub fn domain_center(&self) -> [f64; 2] {
        let half = (self.nx / 2) as f64 * self.h;
        if self.is_1d() {
            [half, 0.0]
        } else {
            [half, half]
        }
    }

    /// Shortest signed displacement `a - b` on the torus.
    pub fn periodic_delta(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let wrap = |d: f64| d - self.length * (d / self.length).round();
        let dy = if self.is_1d() { 0.0 } else { wrap(a[1] - b[1]) };
        [wrap(a[0] - b[0]), dy]
    }

    fn same_as(&self, other: &Grid) -> Result<(), GridError> {
        if self == other {
            Ok(())
        } else {
            Err(GridError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Scalar grid function with a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::InvalidGrid(format!("non-finite value at cell {k}")));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(GridError::InvalidGrid(format!("time {time} must be finite and >= 0")));
        }
        Ok(Self { grid, values, time })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()], time: 0.0 }
    }

    /// Samples `f(x, y)` at every cell center.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let [x, y] = grid.center(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values, time: 0.0 }
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, time }
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise map, keeping grid and time.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.time)
    }

    /// Cyclic shift by `(di, dj)` cells: the value at cell `c` moves to `c + (di, dj)`.
    pub fn shifted(&self, di: i64, dj: i64) -> Field {
        let g = self.grid;
        let mut out = vec![0.0; g.len()];
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                out[g.wrapped_idx(i as i64 + di, j as i64 + dj)] = self.values[g.idx(i, j)];
            }
        }
        Field::from_parts(g, out, self.time)
    }
}

/// Per-cell 2-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.y[k]]
    }

    pub fn norm_sq(&self, k: usize) -> f64 {
        self.x[k] * self.x[k] + self.y[k] * self.y[k]
    }
}

/// Per-cell symmetric 2x2 matrix stored as `(xx, xy, yy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    pub grid: Grid,
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yy: Vec<f64>,
}

impl MatrixField {
    pub fn at(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.xx[k], self.xy[k]], [self.xy[k], self.yy[k]]]
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self, k: usize) -> f64 {
        self.xx[k] * self.xx[k] + 2.0 * self.xy[k] * self.xy[k] + self.yy[k] * self.yy[k]
    }
}

/// Per-cell fully symmetric 2x2x2 tensor stored as `(xxx, xxy, xyy, yyy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3Field {
    pub grid: Grid,
    pub xxx: Vec<f64>,
    pub xxy: Vec<f64>,
    pub xyy: Vec<f64>,
    pub yyy: Vec<f64>,
}

impl Tensor3Field {
    /// Squared Frobenius norm over all eight index triples.
    pub fn norm_sq(&self, k: usize) -> f64 {
        self.xxx[k] * self.xxx[k]
            + 3.0 * self.xxy[k] * self.xxy[k]
            + 3.0 * self.xyy[k] * self.xyy[k]
            + self.yyy[k] * self.yyy[k]
    }
}

// ---------------------------------------------------------------------------
// Stencils
// ---------------------------------------------------------------------------

/// Centered first difference in x of raw values.
fn diff_x(g: &Grid, v: &[f64]) -> Vec<f64> {
    let inv = 0.5 / g.h();
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = vec![0.0; g.len()];
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let im = if i == 0 { nx - 1 } else { i - 1 };
            out[row + i] = (v[row + ip] - v[row + im]) * inv;
        }
    }
    out
}

/// Centered first difference in y of raw values (zero on 1D grids).
fn diff_y(g: &Grid, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    if g.is_1d() {
        return out;
    }
    let inv = 0.5 / g.h();
    let (nx, ny) = (g.nx(), g.ny());
    for j in 0..ny {
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        for i in 0..nx {
            out[j * nx + i] = (v[jp * nx + i] - v[jm * nx + i]) * inv;
        }
    }
    out
}

/// Compact second difference in x.
fn diff_xx(g: &Grid, v: &[f64]) -> Vec<f64> {
    let inv = 1.0 / (g.h() * g.h());
    let (nx, ny) = (g.nx(), g.ny());
    let mut out = vec![0.0; g.len()];
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let c = v[row + i];
            out[row + i] = ((v[row + ip] - c) - (c - v[row + im])) * inv;
        }
    }
    out
}

/// Compact second difference in y (zero on 1D grids).
fn diff_yy(g: &Grid, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    if g.is_1d() {
        return out;
    }
    let inv = 1.0 / (g.h() * g.h());
    let (nx, ny) = (g.nx(), g.ny());
    for j in 0..ny {
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        for i in 0..nx {
            let c = v[j * nx + i];
            out[j * nx + i] = ((v[jp * nx + i] - c) - (c - v[jm * nx + i])) * inv;
        }
    }
    out
}

pub fn gradient(f: &Field) -> VectorField {
    let g = f.grid;
    VectorField { grid: g, x: diff_x(&g, &f.values), y: diff_y(&g, &f.values) }
}

/// Five-point Laplacian (three-point in 1D).
pub fn laplacian(f: &Field) -> Field {
    let g = f.grid;
    let mut lap = diff_xx(&g, &f.values);
    if !g.is_1d() {
        for (l, yy) in lap.iter_mut().zip(diff_yy(&g, &f.values)) {
            *l += yy;
        }
    }
    Field::from_parts(g, lap, f.time)
}

/// Hessian: compact second differences on the diagonal, the four-point
/// cross stencil off the diagonal (the composition of centered x and y
/// differences).
pub fn hessian(f: &Field) -> MatrixField {
    let g = f.grid;
    let xy = diff_y(&g, &diff_x(&g, &f.values));
    MatrixField { grid: g, xx: diff_xx(&g, &f.values), xy, yy: diff_yy(&g, &f.values) }
}

pub fn grad_laplacian(f: &Field) -> VectorField {
    gradient(&laplacian(f))
}

/// Third derivatives from centered first differences of the Hessian
/// diagonal: `xxx = Dx(xx)`, `xxy = Dy(xx)`, `xyy = Dx(yy)`, `yyy = Dy(yy)`.
pub fn third_derivatives(f: &Field) -> Tensor3Field {
    let g = f.grid;
    let xx = diff_xx(&g, &f.values);
    let yy = diff_yy(&g, &f.values);
    Tensor3Field {
        grid: g,
        xxx: diff_x(&g, &xx),
        xxy: diff_y(&g, &xx),
        xyy: diff_x(&g, &yy),
        yyy: diff_y(&g, &yy),
    }
}

// ---------------------------------------------------------------------------
// Regions and quadrature
// ---------------------------------------------------------------------------

/// Integration domain. Membership is decided at cell centers with periodic
/// distances: inner boundaries are strict, outer boundaries inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ball { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], r_in: f64, r_out: f64 },
    Whole,
}

/// A member cell of a region together with its displacement from the
/// region center (zero displacement for [`Region::Whole`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub index: usize,
    pub offset: [f64; 2],
}

impl Region {
    pub fn ball(center: [f64; 2], radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    pub fn annulus(center: [f64; 2], r_in: f64, r_out: f64) -> Self {
        Region::Annulus { center, r_in, r_out }
    }

    pub fn center(&self) -> Option<[f64; 2]> {
        match *self {
            Region::Ball { center, .. } | Region::Annulus { center, .. } => Some(center),
            Region::Whole => None,
        }
    }

    pub fn outer_radius(&self) -> Option<f64> {
        match *self {
            Region::Ball { radius, .. } => Some(radius),
            Region::Annulus { r_out, .. } => Some(r_out),
            Region::Whole => None,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), GridError> {
        let (center, r_in, r_out) = match *self {
            Region::Whole => return Ok(()),
            Region::Ball { center, radius } => (center, 0.0, radius),
            Region::Annulus { center, r_in, r_out } => (center, r_in, r_out),
        };
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(GridError::InvalidRegion(format!("non-finite center {center:?}")));
        }
        if !(r_out.is_finite() && r_out > 0.0) {
            return Err(GridError::InvalidRegion(format!("radius {r_out} must be positive")));
        }
        if !(r_in >= 0.0 && r_in < r_out) {
            return Err(GridError::InvalidRegion(format!(
                "annulus radii must satisfy 0 < r_in < r_out (got {r_in}, {r_out})"
            )));
        }
        // 2 r_out <= L/2, with a few ulps of slack for radii computed as L/4.
        if 2.0 * r_out > 0.5 * grid.length() * (1.0 + 1e-12) {
            return Err(GridError::InvalidRegion(format!(
                "outer radius {r_out} exceeds L/4 = {}; the region would wrap around the torus",
                grid.length() / 4.0
            )));
        }
        Ok(())
    }

    fn contains_sq(&self, d2: f64) -> bool {
        match *self {
            Region::Whole => true,
            Region::Ball { radius, .. } => d2 <= radius * radius,
            Region::Annulus { r_in, r_out, .. } => d2 > r_in * r_in && d2 <= r_out * r_out,
        }
    }

    /// Member cells in a deterministic order that depends only on the
    /// positions relative to the center, so that translating field and
    /// region together reproduces every sum bit for bit.
    pub fn members(&self, grid: &Grid) -> Result<Vec<Member>, GridError> {
        self.validate(grid)?;
        let out = match *self {
            Region::Whole => (0..grid.len()).map(|index| Member { index, offset: [0.0, 0.0] }).collect(),
            Region::Ball { center, .. } | Region::Annulus { center, .. } => {
                let r = self.outer_radius().unwrap_or(0.0);
                let h = grid.h();
                let span = |c: f64| {
                    let lo = ((c - r) / h).floor() as i64 - 1;
                    let hi = ((c + r) / h).ceil() as i64 + 1;
                    (lo, hi)
                };
                let (i_lo, i_hi) = span(center[0]);
                let (j_lo, j_hi) = if grid.is_1d() { (0, 0) } else { span(center[1]) };
                let mut members = Vec::new();
                for j in j_lo..=j_hi {
                    let dy = if grid.is_1d() { 0.0 } else { j as f64 * h - center[1] };
                    for i in i_lo..=i_hi {
                        let dx = i as f64 * h - center[0];
                        if self.contains_sq(dx * dx + dy * dy) {
                            members.push(Member { index: grid.wrapped_idx(i, j), offset: [dx, dy] });
                        }
                    }
                }
                members
            }
        };
        if out.is_empty() {
            return Err(GridError::EmptyRegion { region: format!("{self:?}"), h: grid.h() });
        }
        Ok(out)
    }

    /// Midpoint quadrature of a per-cell integrand `f(cell index, offset)`.
    pub fn integrate_with(
        &self,
        grid: &Grid,
        mut f: impl FnMut(usize, [f64; 2]) -> f64,
    ) -> Result<f64, GridError> {
        let members = self.members(grid)?;
        let sum: f64 = members.iter().map(|m| f(m.index, m.offset)).sum();
        Ok(sum * grid.cell_volume())
    }
}

/// Midpoint quadrature `h² Σ f` (or `h Σ f` in 1D) over the member cells.
pub fn integrate(f: &Field, region: &Region) -> Result<f64, GridError> {
    region.integrate_with(&f.grid, |k, _| f.values[k])
}

/// Quadrature of an arbitrary per-cell array living on `grid`.
pub fn integrate_values(grid: &Grid, values: &[f64], region: &Region) -> Result<f64, GridError> {
    if values.len() != grid.len() {
        return Err(GridError::GridMismatch(format!(
            "expected {} values, got {}",
            grid.len(),
            values.len()
        )));
    }
    region.integrate_with(grid, |k, _| values[k])
}

/// Discrete `(max, min)` over the member cell centers.
pub fn sup_inf(f: &Field, region: &Region) -> Result<(f64, f64), GridError> {
    let members = region.members(&f.grid)?;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for m in &members {
        let v = f.values[m.index];
        hi = hi.max(v);
        lo = lo.min(v);
    }
    Ok((hi, lo))
}

pub(crate) fn ensure_same_grid(a: &Grid, b: &Grid) -> Result<(), GridError> {
    a.same_as(b)
}
