//! Radial cutoff profiles built from the C³ smoothstep and their analytic
//! Cartesian derivatives up to third order.

/// `S(s) = 35s⁴ − 84s⁵ + 70s⁶ − 20s⁷`, clamped to `[0, 1]` outside the unit interval.
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let s4 = s * s * s * s;
        s4 * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)))
    }
}

/// `[S, S', S'', S''']` at `s` (derivatives vanish outside `(0, 1)`).
pub fn smoothstep_derivatives(s: f64) -> [f64; 4] {
    if s <= 0.0 {
        return [0.0; 4];
    }
    if s >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let s2 = s * s;
    let s3 = s2 * s;
    let d1 = s3 * (140.0 + s * (-420.0 + s * (420.0 - 140.0 * s)));
    let d2 = s2 * (420.0 + s * (-1680.0 + s * (2100.0 - 840.0 * s)));
    let d3 = s * (840.0 + s * (-5040.0 + s * (8400.0 - 4200.0 * s)));
    [smoothstep(s), d1, d2, d3]
}

/// `∫₀ˢ S`, equal to `1/2` at `s = 1`.
pub fn smoothstep_integral(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let s5 = s.powi(5);
    s5 * (7.0 + s * (-14.0 + s * (10.0 - 2.5 * s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffKind {
    /// Supported in `B₂∖B₁`, equal to one on `B_{5/3}∖B_{4/3}`.
    AnnulusKernel,
    /// Equal to one on `B₁`, supported in `B₂`.
    BallCutoff,
}

impl CutoffKind {
    /// Profile and its first three derivatives in the radial variable `ρ`
    /// of the unit-scale cutoff.
    pub fn radial(self, rho: f64) -> [f64; 4] {
        match self {
            CutoffKind::BallCutoff => {
                if rho <= 1.0 {
                    [1.0, 0.0, 0.0, 0.0]
                } else if rho >= 2.0 {
                    [0.0; 4]
                } else {
                    let [s, d1, d2, d3] = smoothstep_derivatives(2.0 - rho);
                    [s, -d1, d2, -d3]
                }
            }
            CutoffKind::AnnulusKernel => {
                if rho <= 1.0 || rho >= 2.0 {
                    [0.0; 4]
                } else if rho < 4.0 / 3.0 {
                    let [s, d1, d2, d3] = smoothstep_derivatives(3.0 * (rho - 1.0));
                    [s, 3.0 * d1, 9.0 * d2, 27.0 * d3]
                } else if rho <= 5.0 / 3.0 {
                    [1.0, 0.0, 0.0, 0.0]
                } else {
                    let [s, d1, d2, d3] = smoothstep_derivatives(3.0 * (2.0 - rho));
                    [s, -3.0 * d1, 9.0 * d2, -27.0 * d3]
                }
            }
        }
    }

    /// Width of one transition band at unit scale.
    pub fn ramp_width(self) -> f64 {
        match self {
            CutoffKind::AnnulusKernel => 1.0 / 3.0,
            CutoffKind::BallCutoff => 1.0,
        }
    }
}

/// Value, gradient, Hessian and third-derivative tensor of a scaled cutoff
/// at one point. Tensors are stored as in the grid module:
/// `(xx, xy, yy)` and `(xxx, xxy, xyy, yyy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CutoffJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
    pub third: [f64; 4],
}

impl CutoffJet {
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1]
    }

    pub fn hess_norm_sq(&self) -> f64 {
        let [xx, xy, yy] = self.hess;
        xx * xx + 2.0 * xy * xy + yy * yy
    }

    pub fn third_norm_sq(&self) -> f64 {
        let [a, b, c, d] = self.third;
        a * a + 3.0 * b * b + 3.0 * c * c + d * d
    }
}

/// A cutoff profile placed at `center` and dilated by `radius`: `η((x − center)/radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub kind: CutoffKind,
    pub radius: f64,
    pub center: [f64; 2],
}

impl CutoffProfile {
    pub fn new(kind: CutoffKind, radius: f64, center: [f64; 2]) -> Self {
        Self { kind, radius, center }
    }

    pub fn annulus(radius: f64, center: [f64; 2]) -> Self {
        Self::new(CutoffKind::AnnulusKernel, radius, center)
    }

    pub fn ball(radius: f64, center: [f64; 2]) -> Self {
        Self::new(CutoffKind::BallCutoff, radius, center)
    }

    /// Radius of the support.
    pub fn support_radius(&self) -> f64 {
        2.0 * self.radius
    }

    /// Jet at a displacement `x` from the center.
    pub fn jet(&self, x: [f64; 2]) -> CutoffJet {
        let r = self.radius;
        let s = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let [phi, p1, p2, p3] = self.kind.radial(s / r);
        if p1 == 0.0 && p2 == 0.0 && p3 == 0.0 {
            return CutoffJet { value: phi, ..CutoffJet::default() };
        }
        // Derivatives of f(s) = φ(s / r); s > 0 here since every profile is
        // flat near the origin.
        let (f1, f2, f3) = (p1 / r, p2 / (r * r), p3 / (r * r * r));
        let (ex, ey) = (x[0] / s, x[1] / s);
        let g = f1 / s;
        let gp = f2 / s - f1 / (s * s);
        let a = f3 - 3.0 * gp;
        let hxx = f2 * ex * ex + g * (1.0 - ex * ex);
        let hxy = (f2 - g) * ex * ey;
        let hyy = f2 * ey * ey + g * (1.0 - ey * ey);
        // D³_ijk = a e_i e_j e_k + g'(δ_ij e_k + δ_ik e_j + δ_jk e_i)
        let txxx = a * ex * ex * ex + 3.0 * gp * ex;
        let txxy = a * ex * ex * ey + gp * ey;
        let txyy = a * ex * ey * ey + gp * ex;
        let tyyy = a * ey * ey * ey + 3.0 * gp * ey;
        CutoffJet {
            value: phi,
            grad: [f1 * ex, f1 * ey],
            hess: [hxx, hxy, hyy],
            third: [txxx, txxy, txyy, tyyy],
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let s = (x[0] * x[0] + x[1] * x[1]).sqrt();
        self.kind.radial(s / self.radius)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints_and_symmetry() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            assert!((smoothstep(s) + smoothstep(1.0 - s) - 1.0).abs() < 1e-14);
        }
        assert!((smoothstep_integral(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smoothstep_derivatives_match_differences() {
        let e = 1e-5;
        for k in 1..20 {
            let s = k as f64 / 20.0;
            let d = smoothstep_derivatives(s);
            let dp = smoothstep_derivatives(s + e);
            let dm = smoothstep_derivatives(s - e);
            for o in 0..3 {
                let fd = (dp[o] - dm[o]) / (2.0 * e);
                assert!((fd - d[o + 1]).abs() < 1e-6 * (1.0 + d[o + 1].abs()), "order {o} at {s}");
            }
            let fi = (smoothstep_integral(s + e) - smoothstep_integral(s - e)) / (2.0 * e);
            assert!((fi - d[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn profiles_are_c3_at_band_edges() {
        for kind in [CutoffKind::AnnulusKernel, CutoffKind::BallCutoff] {
            for edge in [1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0] {
                let lo = kind.radial(edge - 1e-9);
                let hi = kind.radial(edge + 1e-9);
                for o in 0..4 {
                    assert!((lo[o] - hi[o]).abs() < 1e-4, "{kind:?} order {o} at {edge}");
                }
            }
        }
    }

    #[test]
    fn plateau_and_support() {
        let a = CutoffKind::AnnulusKernel;
        assert_eq!(a.radial(0.5)[0], 0.0);
        assert_eq!(a.radial(1.5)[0], 1.0);
        assert_eq!(a.radial(2.0)[0], 0.0);
        let b = CutoffKind::BallCutoff;
        assert_eq!(b.radial(0.3)[0], 1.0);
        assert_eq!(b.radial(1.0)[0], 1.0);
        assert_eq!(b.radial(2.5)[0], 0.0);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let e = 1e-5;
        for kind in [CutoffKind::AnnulusKernel, CutoffKind::BallCutoff] {
            let c = CutoffProfile::new(kind, 0.7, [0.0, 0.0]);
            for &p in &[[0.8, 0.3], [-0.5, 0.9], [1.1, -0.4], [0.2, -1.2]] {
                let j = c.jet(p);
                let at = |dx: f64, dy: f64| c.jet([p[0] + dx, p[1] + dy]);
                let (xp, xm, yp, ym) = (at(e, 0.0), at(-e, 0.0), at(0.0, e), at(0.0, -e));
                let fd_grad = [(xp.value - xm.value) / (2.0 * e), (yp.value - ym.value) / (2.0 * e)];
                let fd_hess = [
                    (xp.grad[0] - xm.grad[0]) / (2.0 * e),
                    (yp.grad[0] - ym.grad[0]) / (2.0 * e),
                    (yp.grad[1] - ym.grad[1]) / (2.0 * e),
                ];
                let fd_third = [
                    (xp.hess[0] - xm.hess[0]) / (2.0 * e),
                    (yp.hess[0] - ym.hess[0]) / (2.0 * e),
                    (xp.hess[2] - xm.hess[2]) / (2.0 * e),
                    (yp.hess[2] - ym.hess[2]) / (2.0 * e),
                ];
                let scale = 1.0 + j.third_norm_sq().sqrt();
                for k in 0..2 {
                    assert!((fd_grad[k] - j.grad[k]).abs() < 1e-6 * scale);
                }
                for k in 0..3 {
                    assert!((fd_hess[k] - j.hess[k]).abs() < 1e-5 * scale);
                }
                for k in 0..4 {
                    assert!((fd_third[k] - j.third[k]).abs() < 1e-4 * scale, "{kind:?} {p:?} {k}");
                }
                // Mixed third derivatives agree in both orders.
                let xy_from_x = (xp.hess[1] - xm.hess[1]) / (2.0 * e);
                assert!((xy_from_x - j.third[1]).abs() < 1e-4 * scale);
            }
        }
    }
}
