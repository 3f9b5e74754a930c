//! Annulus-smoothed averages of `D²u` and `∇u`, their time derivatives,
//! and the tilt-excess measured against them.

use super::cutoff::CutoffProfile;
use super::{check_resolvable, default_floor, wet_mobility, DiagnosticsError};
use crate::grid::{grad_laplacian, gradient, Field, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusAverages {
    /// Symmetrized second-derivative average.
    pub b: [[f64; 2]; 2],
    pub c: [f64; 2],
    pub r: f64,
    pub t: f64,
    pub center: [f64; 2],
    /// `|b_xy − b_yx|` of the raw (unsymmetrized) quadrature.
    pub asymmetry: f64,
}

impl AnnulusAverages {
    /// The trivial reference `(b, c) = (0, 0)`.
    pub fn zero(r: f64, t: f64, center: [f64; 2]) -> Self {
        Self { b: [[0.0; 2]; 2], c: [0.0; 2], r, t, center, asymmetry: 0.0 }
    }

    /// `b·x + c`.
    pub fn affine(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.b[0][0] * x[0] + self.b[0][1] * x[1] + self.c[0],
            self.b[1][0] * x[0] + self.b[1][1] * x[1] + self.c[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragesRate {
    pub b_dot: [[f64; 2]; 2],
    pub c_dot: [f64; 2],
}

fn annulus_support(r: f64, center: [f64; 2]) -> Region {
    Region::annulus(center, r, 2.0 * r)
}

/// `b_r = −(1/∫η̃)∫∇η̃(x/r) ⊗ ∇u` (symmetrized) and `c_r = (1/∫η̃)∫η̃(x/r)∇u`,
/// with `η̃` the annulus kernel and `∫η̃` its discrete mass.
pub fn smoothed_averages(u: &Field, r: f64, center: [f64; 2]) -> Result<AnnulusAverages, DiagnosticsError> {
    let g = u.grid();
    check_resolvable(g, r)?;
    let kernel = CutoffProfile::annulus(r, center);
    let members = annulus_support(r, center).members(g)?;
    let du = gradient(u);
    let mut mass = 0.0;
    let mut c = [0.0; 2];
    let mut b = [[0.0; 2]; 2];
    for m in &members {
        let jet = kernel.jet(m.offset);
        let grad_u = du.at(m.index);
        mass += jet.value;
        for i in 0..2 {
            c[i] += jet.value * grad_u[i];
            for j in 0..2 {
                b[i][j] -= jet.grad[i] * grad_u[j];
            }
        }
    }
    for i in 0..2 {
        c[i] /= mass;
        for j in 0..2 {
            b[i][j] /= mass;
        }
    }
    let asymmetry = (b[0][1] - b[1][0]).abs();
    let off = 0.5 * (b[0][1] + b[1][0]);
    b[0][1] = off;
    b[1][0] = off;
    Ok(AnnulusAverages { b, c, r, t: u.time(), center, asymmetry })
}

/// Time derivatives of the smoothed averages along the flow:
/// `b' = (1/∫η̃)∫D³η̃·uⁿ∇Δu`, `c' = −(1/∫η̃)∫D²η̃·uⁿ∇Δu`.
pub fn averages_rate(u: &Field, n: f64, r: f64, center: [f64; 2]) -> Result<AveragesRate, DiagnosticsError> {
    let g = u.grid();
    check_resolvable(g, r)?;
    let kernel = CutoffProfile::annulus(r, center);
    let members = annulus_support(r, center).members(g)?;
    let gl = grad_laplacian(u);
    let eps = default_floor(u);
    let v = u.values();
    let mut mass = 0.0;
    let mut b_dot = [[0.0; 2]; 2];
    let mut c_dot = [0.0; 2];
    for m in &members {
        let jet = kernel.jet(m.offset);
        mass += jet.value;
        let mob = wet_mobility(v[m.index], n, eps);
        let f = [mob * gl.x[m.index], mob * gl.y[m.index]];
        let [hxx, hxy, hyy] = jet.hess;
        let [txxx, txxy, txyy, tyyy] = jet.third;
        c_dot[0] -= hxx * f[0] + hxy * f[1];
        c_dot[1] -= hxy * f[0] + hyy * f[1];
        b_dot[0][0] += txxx * f[0] + txxy * f[1];
        b_dot[0][1] += txxy * f[0] + txyy * f[1];
        b_dot[1][1] += txyy * f[0] + tyyy * f[1];
    }
    b_dot[1][0] = b_dot[0][1];
    for i in 0..2 {
        c_dot[i] /= mass;
        for j in 0..2 {
            b_dot[i][j] /= mass;
        }
    }
    Ok(AveragesRate { b_dot, c_dot })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltExcessReport {
    pub value: f64,
    pub b: [[f64; 2]; 2],
    pub c: [f64; 2],
    pub r: f64,
    /// Radius at which the reference averages were taken.
    pub r_ref: f64,
    pub t: f64,
    pub center: [f64; 2],
}

/// `½∫_{B_r(center)} |∇u − b·x − c|²` with `x` measured from the center.
pub fn tilt_excess(
    u: &Field,
    r: f64,
    reference: &AnnulusAverages,
    center: [f64; 2],
) -> Result<TiltExcessReport, DiagnosticsError> {
    let du = gradient(u);
    let value = 0.5
        * Region::ball(center, r).integrate_with(u.grid(), |k, x| {
            let a = reference.affine(x);
            let (ex, ey) = (du.x[k] - a[0], du.y[k] - a[1]);
            ex * ex + ey * ey
        })?;
    Ok(TiltExcessReport {
        value,
        b: reference.b,
        c: reference.c,
        r,
        r_ref: reference.r,
        t: u.time(),
        center,
    })
}
