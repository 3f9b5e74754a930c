//! Linearly implicit step: mobility frozen at the current state, then
//! `(I + dt·A) u⁺ = u` with `A w = Div(M_face Grad(Lap w))`.
//!
//! `A` is not symmetric for variable mobility. In 1D, when a dry stretch
//! cuts the periodic ring (three consecutive faces with zero mobility),
//! the system is banded and solved directly, which stays exact at step
//! sizes far beyond the explicit bound. Otherwise BiCGSTAB is used; the
//! identity shift keeps it well conditioned at a few times the explicit step.

use super::{weighted_div_grad, SolverError, IMPLICIT_TOLERANCE};
use crate::grid::{Field, Grid};

const MAX_ITERATIONS: usize = 2000;

struct Operator<'a> {
    u: &'a Field,
    mx: &'a [f64],
    my: &'a [f64],
    dt: f64,
    lap: Vec<f64>,
    div: Vec<f64>,
}

impl Operator<'_> {
    fn apply(&mut self, w: &[f64], out: &mut [f64]) {
        laplacian_into(self.u.grid(), w, &mut self.lap);
        weighted_div_grad(self.u, self.mx, self.my, &self.lap, &mut self.div);
        for ((o, &wi), &d) in out.iter_mut().zip(w).zip(&self.div) {
            *o = wi + self.dt * d;
        }
    }
}

fn laplacian_into(g: &Grid, w: &[f64], out: &mut [f64]) {
    let (nx, ny) = (g.nx(), g.ny());
    let inv_h2 = 1.0 / (g.h() * g.h());
    for j in 0..ny {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let c = w[g.idx(i, j)];
            let mut acc = (w[g.idx(ip, j)] - c) - (c - w[g.idx(im, j)]);
            if !g.is_1d() {
                acc += (w[g.idx(i, jp)] - c) - (c - w[g.idx(i, jm)]);
            }
            out[g.idx(i, j)] = acc * inv_h2;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(super) fn solve(u: &Field, mx: &[f64], my: &[f64], dt: f64) -> Result<Vec<f64>, SolverError> {
    if u.grid().is_1d() {
        if let Some(x) = solve_banded_1d(u, mx, dt) {
            return Ok(x);
        }
    }
    solve_iterative(u, mx, my, dt)
}

/// First cell `s` such that faces `s-2, s-1, s` all carry zero mobility.
fn ring_cut(mx: &[f64]) -> Option<usize> {
    let n = mx.len();
    (0..n).find(|&s| (0..3).all(|d| mx[(s + 2 * n - 2 + d) % n] == 0.0))
}

/// Direct solve of the pentadiagonal 1D system, rows and columns taken in
/// ring order starting at a cut. Banded LU with partial pivoting; the band
/// is stored by columns with two extra superdiagonals for fill-in.
fn solve_banded_1d(u: &Field, m: &[f64], dt: f64) -> Option<Vec<f64>> {
    let n = m.len();
    if n < 5 {
        return None;
    }
    let s = ring_cut(m)?;
    let cell = |p: usize| (s + p) % n;
    let scale = dt / u.grid().h().powi(4);
    const W: usize = 7;
    let mut ab = vec![0.0; n * W];
    let at = |r: usize, c: usize| c * W + r + 4 - c;
    for p in 0..n {
        let (mi, mw) = (m[cell(p)], m[cell(p + n - 1)]);
        let coef = [mw, -mi - 3.0 * mw, 3.0 * mi + 3.0 * mw, -3.0 * mi - mw, mi];
        for (o, c) in coef.iter().enumerate() {
            let col = p as isize + o as isize - 2;
            if (0..n as isize).contains(&col) {
                ab[at(p, col as usize)] += scale * c;
            }
        }
        ab[at(p, p)] += 1.0;
    }
    let mut piv = vec![0usize; n];
    for c in 0..n {
        let last = (c + 2).min(n - 1);
        let p = (c..=last).max_by(|&a, &b| ab[at(a, c)].abs().total_cmp(&ab[at(b, c)].abs()))?;
        if ab[at(p, c)] == 0.0 {
            return None;
        }
        piv[c] = p;
        let right = (c + 4).min(n - 1);
        if p != c {
            for j in c..=right {
                ab.swap(at(c, j), at(p, j));
            }
        }
        for r in c + 1..=last {
            let l = ab[at(r, c)] / ab[at(c, c)];
            ab[at(r, c)] = l;
            for j in c + 1..=right {
                ab[at(r, j)] -= l * ab[at(c, j)];
            }
        }
    }
    let v = u.values();
    let mut b: Vec<f64> = (0..n).map(|p| v[cell(p)]).collect();
    for c in 0..n {
        b.swap(c, piv[c]);
        for r in c + 1..=(c + 2).min(n - 1) {
            b[r] -= ab[at(r, c)] * b[c];
        }
    }
    for c in (0..n).rev() {
        let mut acc = b[c];
        for j in c + 1..=(c + 4).min(n - 1) {
            acc -= ab[at(c, j)] * b[j];
        }
        b[c] = acc / ab[at(c, c)];
    }
    let mut x = vec![0.0; n];
    for (p, bp) in b.into_iter().enumerate() {
        x[cell(p)] = bp;
    }
    Some(x)
}

fn solve_iterative(u: &Field, mx: &[f64], my: &[f64], dt: f64) -> Result<Vec<f64>, SolverError> {
    let n = u.grid().len();
    let b = u.values();
    let mut op = Operator { u, mx, my, dt, lap: vec![0.0; n], div: vec![0.0; n] };

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    // The explicit state is a good first guess.
    let mut x = b.to_vec();
    let mut r = vec![0.0; n];
    op.apply(&x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];

    let mut residual = norm(&r) / b_norm;
    for _ in 0..MAX_ITERATIONS {
        if residual <= IMPLICIT_TOLERANCE {
            return Ok(x);
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        op.apply(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= IMPLICIT_TOLERANCE {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok(x);
        }
        op.apply(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        residual = norm(&r) / b_norm;
    }
    if residual <= IMPLICIT_TOLERANCE {
        return Ok(x);
    }
    Err(SolverError::LinearSolve { iterations: MAX_ITERATIONS, residual })
}
