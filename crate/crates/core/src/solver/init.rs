//! Initial film profiles.

use crate::diagnostics::cutoff::smoothstep;
use crate::grid::{Field, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn constant(grid: Grid, value: f64) -> Field {
    Field::constant(grid, value)
}

/// `mean + amplitude · sin(2π k x / L)`.
pub fn mode(grid: Grid, mean: f64, amplitude: f64, k: u32) -> Field {
    let w = 2.0 * PI * k as f64 / grid.length();
    Field::from_fn(grid, |x, _| mean + amplitude * (w * x).sin())
}

/// Smooth compactly supported bump of radius `width` on top of `base`:
/// `base + amplitude · S(1 - ρ/width)²`.
pub fn droplet(grid: Grid, center: [f64; 2], width: f64, amplitude: f64, base: f64) -> Field {
    let c = center;
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let d = grid.periodic_delta(grid.center(i, j), c);
            let rho = (d[0] * d[0] + d[1] * d[1]).sqrt() / width;
            let bump = if rho < 1.0 { smoothstep(1.0 - rho).powi(2) } else { 0.0 };
            values.push(base + amplitude * bump);
        }
    }
    Field::from_parts(grid, values, 0.0)
}

/// Random smooth positive field: a random combination of the Fourier modes
/// with `|k| ≤ 4`, rescaled so that `mean - amplitude ≤ u ≤ mean + amplitude`.
pub fn random_positive(grid: Grid, seed: u64, mean: f64, amplitude: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax: i32 = 4;
    let ky_range = if grid.is_1d() { 0..=0 } else { -kmax..=kmax };
    let mut modes = Vec::new();
    for ky in ky_range {
        for kx in -kmax..=kmax {
            if (kx, ky) == (0, 0) || kx * kx + ky * ky > kmax * kmax {
                continue;
            }
            let a: f64 = rng.gen_range(-1.0..1.0);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            modes.push((kx as f64, ky as f64, a, phase));
        }
    }
    let w = 2.0 * PI / grid.length();
    let raw = Field::from_fn(grid, |x, y| {
        modes.iter().map(|&(kx, ky, a, ph)| a * (w * (kx * x + ky * y) + ph).cos()).sum()
    });
    let peak = raw.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    raw.map(|v| mean + scale * v)
}

/// Speed of the travelling front `u = (x - c t)_+^{3/n}` of the 1D equation.
pub fn travelling_wave_speed(n: f64) -> f64 {
    let p = 3.0 / n;
    p * (p - 1.0) * (p - 2.0)
}

/// The front `(x - x0)_+^{3/n}` of the travelling wave, cut off (set to
/// zero) at `x0 + extent`. Only the part near the front is meaningful; the
/// cut is where a driver supplies the far field.
pub fn travelling_wave(grid: Grid, n: f64, x0: f64, extent: f64) -> Field {
    let p = 3.0 / n;
    Field::from_fn(grid, |x, _| {
        let s = x - x0;
        if s > 0.0 && s < extent {
            s.powf(p)
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn droplet_is_compact_and_peaks_at_center() {
        let g = Grid::square(32, 1.0).unwrap();
        let c = g.domain_center();
        let u = droplet(g, c, 0.2, 1.5, 0.0);
        assert_eq!(u.at(16, 16), 1.5);
        assert_eq!(u.at(16 + 7, 16), 0.0);
        assert!(u.at(16 + 6, 16) > 0.0);
        assert_eq!(u.min(), 0.0);
    }

    #[test]
    fn random_field_respects_bounds_and_seed() {
        let g = Grid::square(32, 1.0).unwrap();
        let a = random_positive(g, 7, 1.0, 0.5);
        let b = random_positive(g, 7, 1.0, 0.5);
        let c = random_positive(g, 8, 1.0, 0.5);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.min() >= 0.5 - 1e-12 && a.max() <= 1.5 + 1e-12);
        let dev = a.values().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        assert!((dev - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wave_speed_for_unit_exponent() {
        assert_eq!(travelling_wave_speed(1.0), 6.0);
        assert!(travelling_wave_speed(2.0) < 0.0);
    }

    #[test]
    fn wave_front_is_exact_power() {
        let g = Grid::line(64, 64.0).unwrap();
        let u = travelling_wave(g, 1.5, 10.0, 20.0);
        assert_eq!(u.at(10, 0), 0.0);
        assert_eq!(u.at(14, 0), 16.0);
        assert_eq!(u.at(29, 0), 361.0);
        assert_eq!(u.at(30, 0), 0.0);
    }
}
