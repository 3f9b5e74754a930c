//! Direct-summation oracles for the diagnostics, written against plain
//! arrays with their own stencils, cutoffs and region membership.
#![allow(dead_code)]

use thinfilm::grid::Field;

pub struct Arr {
    pub nx: usize,
    pub h: f64,
    pub v: Vec<f64>,
}

impl Arr {
    pub fn of(u: &Field) -> Self {
        assert!(!u.grid().is_1d());
        Arr { nx: u.grid().nx(), h: u.grid().h(), v: u.values().to_vec() }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Arr { nx: self.nx, h: self.h, v: self.v.iter().map(|&x| f(x)).collect() }
    }

    pub fn get(&self, i: i64, j: i64) -> f64 {
        let n = self.nx as i64;
        self.v[(j.rem_euclid(n) * n + i.rem_euclid(n)) as usize]
    }

    fn cells(&self) -> impl Iterator<Item = (i64, i64)> {
        let n = self.nx as i64;
        (0..n).flat_map(move |j| (0..n).map(move |i| (i, j)))
    }

    fn dx(&self, i: i64, j: i64) -> f64 {
        (self.get(i + 1, j) - self.get(i - 1, j)) / (2.0 * self.h)
    }

    fn dy(&self, i: i64, j: i64) -> f64 {
        (self.get(i, j + 1) - self.get(i, j - 1)) / (2.0 * self.h)
    }

    fn dxx(&self, i: i64, j: i64) -> f64 {
        (self.get(i + 1, j) - 2.0 * self.get(i, j) + self.get(i - 1, j)) / (self.h * self.h)
    }

    fn dyy(&self, i: i64, j: i64) -> f64 {
        (self.get(i, j + 1) - 2.0 * self.get(i, j) + self.get(i, j - 1)) / (self.h * self.h)
    }

    fn dxy(&self, i: i64, j: i64) -> f64 {
        (self.get(i + 1, j + 1) - self.get(i - 1, j + 1) - self.get(i + 1, j - 1) + self.get(i - 1, j - 1))
            / (4.0 * self.h * self.h)
    }

    pub fn grad(&self, i: i64, j: i64) -> [f64; 2] {
        [self.dx(i, j), self.dy(i, j)]
    }

    pub fn hess(&self, i: i64, j: i64) -> [[f64; 2]; 2] {
        let xy = self.dxy(i, j);
        [[self.dxx(i, j), xy], [xy, self.dyy(i, j)]]
    }

    /// Full third-derivative tensor from centered differences of the
    /// Hessian diagonal.
    pub fn third(&self, i: i64, j: i64) -> [[[f64; 2]; 2]; 2] {
        let h2 = 2.0 * self.h;
        let xxx = (self.dxx(i + 1, j) - self.dxx(i - 1, j)) / h2;
        let xxy = (self.dxx(i, j + 1) - self.dxx(i, j - 1)) / h2;
        let xyy = (self.dyy(i + 1, j) - self.dyy(i - 1, j)) / h2;
        let yyy = (self.dyy(i, j + 1) - self.dyy(i, j - 1)) / h2;
        [[[xxx, xxy], [xxy, xyy]], [[xxy, xyy], [xyy, yyy]]]
    }

    pub fn grad_lap(&self, i: i64, j: i64) -> [f64; 2] {
        let lap = |a: i64, b: i64| self.dxx(a, b) + self.dyy(a, b);
        let h2 = 2.0 * self.h;
        [(lap(i + 1, j) - lap(i - 1, j)) / h2, (lap(i, j + 1) - lap(i, j - 1)) / h2]
    }

    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn pos(&self, i: i64, j: i64) -> [f64; 2] {
        [i as f64 * self.h, j as f64 * self.h]
    }

    /// Minimal-image displacement of cell `(i, j)` from `c`.
    pub fn disp(&self, i: i64, j: i64, c: [f64; 2]) -> [f64; 2] {
        let l = self.nx as f64 * self.h;
        let p = self.pos(i, j);
        let w = |d: f64| d - l * (d / l).round();
        [w(p[0] - c[0]), w(p[1] - c[1])]
    }

    /// `h² Σ f(i, j, x)` over cells with `lo² < |x|² ≤ hi²` (`lo < 0` includes the center).
    pub fn sum_shell(&self, c: [f64; 2], lo: f64, hi: f64, mut f: impl FnMut(i64, i64, [f64; 2]) -> f64) -> f64 {
        let mut s = 0.0;
        for (i, j) in self.cells() {
            let x = self.disp(i, j, c);
            let d2 = x[0] * x[0] + x[1] * x[1];
            let inner = if lo < 0.0 { true } else { d2 > lo * lo };
            if inner && d2 <= hi * hi {
                s += f(i, j, x);
            }
        }
        s * self.h * self.h
    }

    pub fn sum_all(&self, mut f: impl FnMut(i64, i64) -> f64) -> f64 {
        self.cells().map(|(i, j)| f(i, j)).sum::<f64>() * self.h * self.h
    }
}

pub fn n2(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

pub fn m2(m: [[f64; 2]; 2]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum()
}

pub fn t2(t: [[[f64; 2]; 2]; 2]) -> f64 {
    t.iter().flatten().flatten().map(|x| x * x).sum()
}

/// `u^p` clamped at `eps` below exponent one and at zero otherwise.
pub fn powf(u: f64, p: f64, eps: f64) -> f64 {
    if p < 1.0 {
        if u <= 0.0 && eps == 0.0 {
            0.0
        } else {
            u.max(eps).powf(p)
        }
    } else {
        u.max(0.0).powf(p)
    }
}

pub fn wet(u: f64, n: f64, eps: f64) -> f64 {
    if u > eps && u > 0.0 {
        u.powf(n)
    } else {
        0.0
    }
}

pub fn floor_of(a: &Arr) -> f64 {
    1e-10 * a.max().max(0.0)
}

// --- smoothstep and cutoffs ------------------------------------------------

const SMOOTH: [f64; 8] = [0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0];

/// k-th derivative of the smoothstep polynomial, clamped outside (0, 1).
fn smooth_d(s: f64, k: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut acc = 0.0;
    for (p, &c) in SMOOTH.iter().enumerate().skip(k) {
        let falling: f64 = (0..k).map(|m| (p - m) as f64).product();
        acc += c * falling * s.powi((p - k) as i32);
    }
    acc
}

#[derive(Clone, Copy, PartialEq)]
pub enum Kind {
    Annulus,
    Ball,
}

/// `d^k/dρ^k` of the unit-scale profile.
fn radial_d(kind: Kind, rho: f64, k: usize) -> f64 {
    let sign = |m: f64| if k % 2 == 1 { -m } else { m };
    match kind {
        Kind::Ball => {
            if rho <= 1.0 {
                if k == 0 { 1.0 } else { 0.0 }
            } else if rho >= 2.0 {
                0.0
            } else {
                sign(smooth_d(2.0 - rho, k))
            }
        }
        Kind::Annulus => {
            let scale = 3f64.powi(k as i32);
            if rho <= 1.0 || rho >= 2.0 {
                0.0
            } else if rho < 4.0 / 3.0 {
                scale * smooth_d(3.0 * (rho - 1.0), k)
            } else if rho <= 5.0 / 3.0 {
                if k == 0 { 1.0 } else { 0.0 }
            } else {
                sign(scale * smooth_d(3.0 * (2.0 - rho), k))
            }
        }
    }
}

pub struct Jet {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [[f64; 2]; 2],
    pub t: [[[f64; 2]; 2]; 2],
}

/// Jet of `η(x / r)` at displacement `x` via the radial tensor identities.
pub fn jet(kind: Kind, r: f64, x: [f64; 2]) -> Jet {
    let s = n2(x).sqrt();
    let f: Vec<f64> = (0..4).map(|k| radial_d(kind, s / r, k) / r.powi(k as i32)).collect();
    let mut out = Jet { v: f[0], g: [0.0; 2], h: [[0.0; 2]; 2], t: [[[0.0; 2]; 2]; 2] };
    if s == 0.0 || (f[1] == 0.0 && f[2] == 0.0 && f[3] == 0.0) {
        return out;
    }
    let e = [x[0] / s, x[1] / s];
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let q = f[2] / s - f[1] / (s * s);
    for a in 0..2 {
        out.g[a] = f[1] * e[a];
        for b in 0..2 {
            out.h[a][b] = f[2] * e[a] * e[b] + f[1] / s * (d(a, b) - e[a] * e[b]);
            for c in 0..2 {
                out.t[a][b][c] = f[3] * e[a] * e[b] * e[c]
                    + q * (d(a, b) * e[c] + d(a, c) * e[b] + d(b, c) * e[a] - 3.0 * e[a] * e[b] * e[c]);
            }
        }
    }
    out
}

// --- functionals -------------------------------------------------------------

pub fn energy(a: &Arr) -> f64 {
    0.5 * a.sum_all(|i, j| n2(a.grad(i, j)))
}

pub fn dissipation(a: &Arr, n: f64) -> f64 {
    let eps = floor_of(a);
    a.sum_all(|i, j| wet(a.get(i, j), n, eps) * n2(a.grad_lap(i, j)))
}

pub fn entropy(a: &Arr, alpha: f64) -> f64 {
    let eps = floor_of(a);
    a.sum_all(|i, j| powf(a.get(i, j), 1.0 + alpha, eps)) / (alpha * (1.0 + alpha))
}

pub fn entropy_rhs(a: &Arr, n: f64, alpha: f64) -> f64 {
    let eps = floor_of(a);
    let m = n + alpha + 1.0;
    let w = a.map(|u| powf(u, m / 2.0, eps));
    let q = a.map(|u| powf(u, m / 4.0, eps));
    a.sum_all(|i, j| m2(w.hess(i, j)) + n2(q.grad(i, j)).powi(2))
}

/// `[grad_power6, mixed_d2, d3_power, dissipation_term, cutoff_term]`.
pub fn bernis_gruen(a: &Arr, n: f64, r: f64, c: [f64; 2]) -> [f64; 5] {
    let eps = floor_of(a);
    let v = a.map(|u| powf(u, (n + 2.0) / 6.0, eps));
    let w = a.map(|u| powf(u, (n + 2.0) / 2.0, eps));
    let mut out = [0.0; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = a.sum_shell(c, -1.0, 2.0 * r, |i, j, x| {
            let jt = jet(Kind::Ball, r, x);
            let e6 = jt.v.powi(6);
            let u = a.get(i, j);
            match k {
                0 => n2(v.grad(i, j)).powi(3) * e6,
                1 => 36.0 / (n + 2.0).powi(2) * powf(u, 2.0 * (n - 1.0) / 3.0, eps) * m2(a.hess(i, j)) * n2(v.grad(i, j)) * e6,
                2 => t2(w.third(i, j)) * e6,
                3 => wet(u, n, eps) * n2(a.grad_lap(i, j)) * e6,
                _ => {
                    powf(u, n + 2.0, eps)
                        * (n2(jt.g).powi(3) + jt.v.powi(3) * m2(jt.h).powf(1.5) + jt.v.powi(4) * t2(jt.t))
                }
            }
        });
    }
    out
}

/// `(b, c)` of the annulus-smoothed averages.
pub fn averages(a: &Arr, r: f64, c: [f64; 2]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mass = a.sum_shell(c, r, 2.0 * r, |_, _, x| jet(Kind::Annulus, r, x).v);
    let mut b = [[0.0; 2]; 2];
    let mut cc = [0.0; 2];
    for p in 0..2 {
        cc[p] = a.sum_shell(c, r, 2.0 * r, |i, j, x| jet(Kind::Annulus, r, x).v * a.grad(i, j)[p]) / mass;
        for q in 0..2 {
            b[p][q] = -a.sum_shell(c, r, 2.0 * r, |i, j, x| jet(Kind::Annulus, r, x).g[p] * a.grad(i, j)[q]) / mass;
        }
    }
    let off = 0.5 * (b[0][1] + b[1][0]);
    b[0][1] = off;
    b[1][0] = off;
    (b, cc)
}

fn tilt_sq(a: &Arr, b: [[f64; 2]; 2], c: [f64; 2], i: i64, j: i64, x: [f64; 2]) -> f64 {
    let g = a.grad(i, j);
    (0..2).map(|p| (g[p] - b[p][0] * x[0] - b[p][1] * x[1] - c[p]).powi(2)).sum()
}

pub fn tilt_excess(a: &Arr, r: f64, b: [[f64; 2]; 2], cc: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * a.sum_shell(c, -1.0, r, |i, j, x| tilt_sq(a, b, cc, i, j, x))
}

/// Poincaré sides in library order: `[(lhs, rhs); 5]`.
pub fn poincare(a: &Arr, r: f64, c: [f64; 2]) -> [(f64, f64); 5] {
    let (b, cc) = averages(a, r, c);
    let d2dev = |i: i64, j: i64| {
        let hm = a.hess(i, j);
        (0..2).flat_map(|p| (0..2).map(move |q| (p, q))).map(|(p, q)| (hm[p][q] - b[p][q]).powi(2)).sum::<f64>()
    };
    let ann_tilt = a.sum_shell(c, r, 2.0 * r, |i, j, x| tilt_sq(a, b, cc, i, j, x));
    let ann_d2 = a.sum_shell(c, r, 2.0 * r, |i, j, _| d2dev(i, j));
    let ann_d3 = a.sum_shell(c, r, 2.0 * r, |i, j, _| t2(a.third(i, j)));
    let ball_tilt = a.sum_shell(c, -1.0, 2.0 * r, |i, j, x| tilt_sq(a, b, cc, i, j, x));
    let ball_d2 = a.sum_shell(c, -1.0, 2.0 * r, |i, j, _| d2dev(i, j));
    let ball_d3 = a.sum_shell(c, -1.0, 2.0 * r, |i, j, _| t2(a.third(i, j)));
    let ball_l1 = a.sum_shell(c, -1.0, 2.0 * r, |i, j, _| t2(a.third(i, j)).sqrt());
    [
        (ann_tilt, r * r * ann_d2),
        (ann_d2, r * r * ann_d3),
        (ball_d2, ball_l1 * ball_l1),
        (ball_tilt, r * r * ball_d2),
        (ball_d2, r * r * ball_d3),
    ]
}

/// `[d3_ball, grad_laplacian_term, d3_annulus_term]`.
pub fn third_derivative(a: &Arr, r: f64, c: [f64; 2]) -> [f64; 3] {
    [
        a.sum_shell(c, -1.0, r, |i, j, _| t2(a.third(i, j))),
        a.sum_shell(c, -1.0, 2.0 * r, |i, j, _| n2(a.grad_lap(i, j))),
        a.sum_shell(c, r, 2.0 * r, |i, j, _| t2(a.third(i, j))),
    ]
}

/// `[weighted_d2, dissipation_term, gradient_term, quartic_term]`.
pub fn second_derivative(a: &Arr, n: f64, r: f64, c: [f64; 2]) -> [f64; 4] {
    let eps = floor_of(a);
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = a.sum_shell(c, -1.0, 2.0 * r, |i, j, x| {
            let jt = jet(Kind::Ball, r, x);
            let u = a.get(i, j);
            let g2 = n2(a.grad(i, j));
            match k {
                0 => powf(u, n, eps) * m2(a.hess(i, j)) * jt.v * jt.v,
                1 => wet(u, n, eps) * n2(a.grad_lap(i, j)),
                2 => powf(u, n, eps) * g2 * (jt.v.powi(4) + n2(jt.g)),
                _ if jt.v != 0.0 && g2 != 0.0 => powf(u, n - 2.0, eps) * g2 * g2 * jt.v * jt.v,
                _ => 0.0,
            }
        });
    }
    out
}

/// `(sup, inf)` over the closed ball.
pub fn sup_inf(a: &Arr, r: f64, c: [f64; 2]) -> (f64, f64) {
    let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
    a.sum_shell(c, -1.0, r, |i, j, _| {
        sup = sup.max(a.get(i, j));
        inf = inf.min(a.get(i, j));
        0.0
    });
    (sup, inf)
}

/// `[max_power, annulus_term, core_term]`, `None` when the ball is at a good time.
pub fn morrey(a: &Arr, n: f64, r: f64, delta: f64, c: [f64; 2]) -> Option<[f64; 3]> {
    let (sup, inf) = sup_inf(a, 2.0 * r, c);
    if sup <= 2.0 * inf {
        return None;
    }
    let eps = floor_of(a);
    let v = a.map(|u| powf(u, (n + 2.0) / 6.0, eps));
    let scale = r.powi(4);
    let ann = a.sum_shell(c, delta * r, 2.0 * r, |i, j, _| n2(v.grad(i, j)).powi(3));
    let core = a.sum_shell(c, -1.0, delta * r, |i, j, _| n2(v.grad(i, j)).powi(3));
    Some([sup.max(0.0).powf(n + 2.0), scale * ann, scale * delta * core])
}

/// Hole-filling ingredients
/// `[excess_inner_t2, excess_outer_t1, good_inner, good_outer, bad_inner, bad_outer]`
/// for snapshots `snaps` spanning `[t1, t2]`.
pub fn hole_filling(snaps: &[(f64, Arr)], n: f64, r: f64, delta: f64, c: [f64; 2]) -> [f64; 6] {
    let (_, first) = &snaps[0];
    let (_, last) = &snaps[snaps.len() - 1];
    let (b2, c2) = averages(last, r, c);
    let (b1, c1) = averages(first, r, c);
    let mut out = [0.0; 6];
    out[0] = tilt_excess(last, delta * r, b2, c2, c);
    out[1] = tilt_excess(first, 2.0 * r, b1, c1, c);
    let terms = |a: &Arr, rad: f64| {
        let eps = floor_of(a);
        let v = a.map(|u| powf(u, (n + 2.0) / 6.0, eps));
        let diss = a.sum_shell(c, -1.0, rad, |i, j, _| wet(a.get(i, j), n, eps) * n2(a.grad_lap(i, j)));
        let d3 = a.sum_shell(c, -1.0, rad, |i, j, _| powf(a.get(i, j), n, eps) * t2(a.third(i, j)));
        let p6 = a.sum_shell(c, -1.0, rad, |i, j, _| n2(v.grad(i, j)).powi(3));
        let (sup, inf) = sup_inf(a, rad, c);
        let good = sup <= 2.0 * inf;
        if good {
            (diss + d3, 0.0)
        } else {
            (0.0, diss + p6)
        }
    };
    let series: Vec<[f64; 4]> = snaps
        .iter()
        .map(|(_, a)| {
            let (gi, bi) = terms(a, delta * r);
            let (go, bo) = terms(a, 2.0 * r);
            [gi, go, bi, bo]
        })
        .collect();
    for k in 0..4 {
        out[2 + k] = snaps
            .windows(2)
            .zip(series.windows(2))
            .map(|(t, s)| 0.5 * (s[0][k] + s[1][k]) * (t[1].0 - t[0].0))
            .sum();
    }
    out
}

/// Relative difference with an absolute floor for values that vanish.
pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
