//! Left and right sides of the functional inequalities behind the
//! regularity argument. The unknown constants are not computed; callers
//! look at the ratio `lhs / Σ rhs` across families of fields.

use super::averages::smoothed_averages;
use super::cutoff::CutoffProfile;
use super::{
    check_resolvable, classify_time, default_floor, pow_floor, power_field, wet_mobility, DiagnosticsError,
    InequalityCheck, TimeLabel,
};
use crate::grid::{grad_laplacian, gradient, hessian, third_derivatives, Field, Region};

fn sq(x: f64) -> f64 {
    x * x
}

/// Weighted Bernis–Grün inequality on the support of `cut` (radius `2r`):
///
/// lhs = ∫ [|∇u^{(n+2)/6}|⁶ + 36/(n+2)² u^{2(n−1)/3}|D²u|²|∇u^{(n+2)/6}|² + |D³u^{(n+2)/2}|²] η⁶,
/// rhs = ∫ uⁿ|∇Δu|²η⁶ and ∫ u^{n+2}(|∇η|⁶ + η³|D²η|³ + η⁴|D³η|²).
pub fn bernis_gruen_sides(u: &Field, n: f64, cut: &CutoffProfile) -> Result<InequalityCheck, DiagnosticsError> {
    let g = u.grid();
    check_resolvable(g, cut.radius)?;
    let members = Region::ball(cut.center, cut.support_radius()).members(g)?;
    let eps = default_floor(u);
    let gv = gradient(&power_field(u, (n + 2.0) / 6.0, eps));
    let d3w = third_derivatives(&power_field(u, (n + 2.0) / 2.0, eps));
    let d2u = hessian(u);
    let gl = grad_laplacian(u);
    let v = u.values();
    let mixed_coeff = 36.0 / sq(n + 2.0);
    let (mut t1, mut t2, mut t3, mut diss, mut cutoff) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for m in &members {
        let k = m.index;
        let jet = cut.jet(m.offset);
        let eta = jet.value;
        let eta6 = eta.powi(6);
        let gv2 = gv.norm_sq(k);
        if eta6 != 0.0 {
            t1 += gv2 * gv2 * gv2 * eta6;
            t2 += mixed_coeff * pow_floor(v[k], 2.0 * (n - 1.0) / 3.0, eps) * d2u.norm_sq(k) * gv2 * eta6;
            t3 += d3w.norm_sq(k) * eta6;
            diss += wet_mobility(v[k], n, eps) * gl.norm_sq(k) * eta6;
        }
        let weight = jet.grad_norm_sq().powi(3)
            + eta.powi(3) * jet.hess_norm_sq().powf(1.5)
            + eta.powi(4) * jet.third_norm_sq();
        if weight != 0.0 {
            cutoff += pow_floor(v[k], n + 2.0, eps) * weight;
        }
    }
    let vol = g.cell_volume();
    Ok(InequalityCheck::new(
        "bernis_gruen",
        vec![("grad_power6", t1 * vol), ("mixed_d2", t2 * vol), ("d3_power", t3 * vol)],
        vec![("dissipation_term", diss * vol), ("cutoff_term", cutoff * vol)],
    ))
}

/// Sup bound at a bad time:
/// `max_{B_2r} u^{n+2} ≤ C r^{6−d} ∫_{B_2r∖B_δr}|∇u^{(n+2)/6}|⁶ + C r^{6−d} δ ∫_{B_δr}|∇u^{(n+2)/6}|⁶`.
///
/// A film that vanishes on the whole ball satisfies the bound trivially and
/// is reported with all sides zero instead of as a classification failure.
pub fn morrey_sup_check(
    u: &Field,
    n: f64,
    r: f64,
    delta: f64,
    center: [f64; 2],
) -> Result<InequalityCheck, DiagnosticsError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(DiagnosticsError::InvalidArgument(format!("delta = {delta} must lie in (0, 1]")));
    }
    let g = u.grid();
    let outer = Region::ball(center, 2.0 * r);
    let class = classify_time(u, &outer)?;
    let name = "morrey_sup";
    if class.sup <= 0.0 {
        return Ok(InequalityCheck::new(name, vec![("max_power", 0.0)], vec![("annulus_term", 0.0), ("core_term", 0.0)]));
    }
    if class.label != TimeLabel::Bad {
        return Err(DiagnosticsError::NotBadTime { sup: class.sup, inf: class.inf });
    }
    let eps = default_floor(u);
    let gv = gradient(&power_field(u, (n + 2.0) / 6.0, eps));
    let p6 = |k: usize| gv.norm_sq(k).powi(3);
    let d = if g.is_1d() { 1 } else { 2 };
    let scale = r.powi(6 - d);
    let annulus = Region::annulus(center, delta * r, 2.0 * r).integrate_with(g, |k, _| p6(k))?;
    let core = Region::ball(center, delta * r).integrate_with(g, |k, _| p6(k))?;
    let lhs = class.sup.max(0.0).powf(n + 2.0);
    Ok(InequalityCheck::new(
        name,
        vec![("max_power", lhs)],
        vec![("annulus_term", scale * annulus), ("core_term", scale * delta * core)],
    ))
}

/// Poincaré-type bounds around `(b_r, c_r)`, on the annulus `B_2r∖B_r` and
/// on the ball `B_2r`:
///
/// * `annulus_nabla`: ∫|∇u − b·x − c|² vs r²∫|D²u − b|²
/// * `annulus_d2`: ∫|D²u − b|² vs r²∫|D³u|²
/// * `poincare_sobolev`: ∫_{B_2r}|D²u − b|² vs (∫_{B_2r}|D³u|)²
/// * `ball_nabla`, `ball_d2`: the first two with the annulus replaced by `B_2r`.
pub fn poincare_checks(u: &Field, r: f64, center: [f64; 2]) -> Result<Vec<InequalityCheck>, DiagnosticsError> {
    let g = u.grid();
    let av = smoothed_averages(u, r, center)?;
    let du = gradient(u);
    let d2 = hessian(u);
    let d3 = third_derivatives(u);
    let b = av.b;
    let tilt = |k: usize, x: [f64; 2]| {
        let a = av.affine(x);
        sq(du.x[k] - a[0]) + sq(du.y[k] - a[1])
    };
    let d2_dev = |k: usize| sq(d2.xx[k] - b[0][0]) + 2.0 * sq(d2.xy[k] - b[0][1]) + sq(d2.yy[k] - b[1][1]);
    let d3_sq = |k: usize| d3.norm_sq(k);

    let ann = Region::annulus(center, r, 2.0 * r);
    let ball = Region::ball(center, 2.0 * r);
    let r2 = r * r;

    let ann_tilt = ann.integrate_with(g, tilt)?;
    let ann_d2 = ann.integrate_with(g, |k, _| d2_dev(k))?;
    let ann_d3 = ann.integrate_with(g, |k, _| d3_sq(k))?;
    let ball_tilt = ball.integrate_with(g, tilt)?;
    let ball_d2 = ball.integrate_with(g, |k, _| d2_dev(k))?;
    let ball_d3 = ball.integrate_with(g, |k, _| d3_sq(k))?;
    let ball_d3_l1 = ball.integrate_with(g, |k, _| d3_sq(k).sqrt())?;

    Ok(vec![
        InequalityCheck::new("annulus_nabla", vec![("tilt", ann_tilt)], vec![("d2_deviation", r2 * ann_d2)]),
        InequalityCheck::new("annulus_d2", vec![("d2_deviation", ann_d2)], vec![("d3", r2 * ann_d3)]),
        InequalityCheck::new("poincare_sobolev", vec![("d2_deviation", ball_d2)], vec![("d3_l1_squared", sq(ball_d3_l1))]),
        InequalityCheck::new("ball_nabla", vec![("tilt", ball_tilt)], vec![("d2_deviation", r2 * ball_d2)]),
        InequalityCheck::new("ball_d2", vec![("d2_deviation", ball_d2)], vec![("d3", r2 * ball_d3)]),
    ])
}

/// `∫_{B_r}|D³u|² ≤ C∫_{B_2r}|∇Δu|² + C∫_{B_2r∖B_r}|D³u|²`.
pub fn third_derivative_check(u: &Field, r: f64, center: [f64; 2]) -> Result<InequalityCheck, DiagnosticsError> {
    let g = u.grid();
    check_resolvable(g, r)?;
    let d3 = third_derivatives(u);
    let gl = grad_laplacian(u);
    let lhs = Region::ball(center, r).integrate_with(g, |k, _| d3.norm_sq(k))?;
    let bulk = Region::ball(center, 2.0 * r).integrate_with(g, |k, _| gl.norm_sq(k))?;
    let ann = Region::annulus(center, r, 2.0 * r).integrate_with(g, |k, _| d3.norm_sq(k))?;
    Ok(InequalityCheck::new(
        "third_derivative",
        vec![("d3_ball", lhs)],
        vec![("grad_laplacian_term", bulk), ("d3_annulus_term", ann)],
    ))
}

/// `∫uⁿ|D²u|²η² ≤ ∫_{supp η}uⁿ|∇Δu|² + C∫uⁿ|∇u|²(η⁴ + |∇η|²) + C∫u^{n−2}|∇u|⁴η²`.
pub fn second_derivative_check(u: &Field, n: f64, cut: &CutoffProfile) -> Result<InequalityCheck, DiagnosticsError> {
    let g = u.grid();
    check_resolvable(g, cut.radius)?;
    let members = Region::ball(cut.center, cut.support_radius()).members(g)?;
    let eps = default_floor(u);
    let du = gradient(u);
    let d2 = hessian(u);
    let gl = grad_laplacian(u);
    let v = u.values();
    let (mut lhs, mut diss, mut grad_term, mut quartic) = (0.0, 0.0, 0.0, 0.0);
    for m in &members {
        let k = m.index;
        let jet = cut.jet(m.offset);
        let eta = jet.value;
        let wet = wet_mobility(v[k], n, eps);
        let g2 = du.norm_sq(k);
        diss += wet * gl.norm_sq(k);
        if eta != 0.0 || jet.grad_norm_sq() != 0.0 {
            let un = pow_floor(v[k], n, eps);
            lhs += un * d2.norm_sq(k) * eta * eta;
            grad_term += un * g2 * (eta.powi(4) + jet.grad_norm_sq());
            if eta != 0.0 && g2 != 0.0 {
                quartic += pow_floor(v[k], n - 2.0, eps) * g2 * g2 * eta * eta;
            }
        }
    }
    let vol = g.cell_volume();
    Ok(InequalityCheck::new(
        "second_derivative",
        vec![("weighted_d2", lhs * vol)],
        vec![("dissipation_term", diss * vol), ("gradient_term", grad_term * vol), ("quartic_term", quartic * vol)],
    ))
}
