use proptest::prelude::*;
use thinfilm::diagnostics::{classify_time, energy, smoothed_averages, tilt_excess, TimeLabel};
use thinfilm::grid::{Field, Grid, Region};
use thinfilm::io::{decode_snapshot, encode_snapshot, format_float};
use thinfilm::regularity::{fit_decay, spatial_holder};
use thinfilm::solver::{init, mass, step, MobilityModel, SolverConfig};

fn grid32() -> Grid {
    Grid::square(32, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn explicit_step_conserves_mass(seed in 0u64..1000, n in 1.2f64..2.9, amp in 0.0f64..0.9) {
        let u = init::random_positive(grid32(), seed, 1.0, amp);
        let cfg = SolverConfig::new(MobilityModel::new(n, 1e-10, true).unwrap(), 1.0, 1.0);
        let (v, _) = step(&u, &cfg).unwrap();
        let sum_abs: f64 = u.values().iter().map(|x| x.abs()).sum::<f64>() * u.grid().cell_volume();
        prop_assert!((mass(&v) - mass(&u)).abs() <= 1e-12 * sum_abs);
    }

    #[test]
    fn affine_gradients_are_reproduced(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -1.0f64..1.0) {
        let g = Grid::square(64, 1.0).unwrap();
        let ctr = g.domain_center();
        let u = Field::from_fn(g, |x, y| a * (x - ctr[0]) + b * (y - ctr[1]) + c);
        let av = smoothed_averages(&u, 0.125, ctr).unwrap();
        prop_assert!((av.c[0] - a).abs() < 1e-10 && (av.c[1] - b).abs() < 1e-10);
        prop_assert!(tilt_excess(&u, 0.2, &av, ctr).unwrap().value < 1e-18);
    }

    #[test]
    fn tilt_excess_is_nonnegative_and_quadratic(seed in 0u64..1000, lam in 0.1f64..5.0) {
        let g = Grid::square(64, 1.0).unwrap();
        let ctr = g.domain_center();
        let u = init::random_positive(g, seed, 1.0, 0.5);
        let av = smoothed_averages(&u, 0.125, ctr).unwrap();
        let e = tilt_excess(&u, 0.125, &av, ctr).unwrap().value;
        prop_assert!(e >= 0.0);
        let v = u.map(|x| lam * x);
        let av2 = smoothed_averages(&v, 0.125, ctr).unwrap();
        let e2 = tilt_excess(&v, 0.125, &av2, ctr).unwrap().value;
        prop_assert!((e2 - lam * lam * e).abs() <= 1e-10 * e2.max(1e-300));
    }

    #[test]
    fn energy_is_translation_invariant(seed in 0u64..1000, di in -20i64..20, dj in -20i64..20) {
        let u = init::random_positive(grid32(), seed, 1.0, 0.5);
        let e0 = energy(&u, &Region::Whole).unwrap();
        let e1 = energy(&u.shifted(di, dj), &Region::Whole).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0);
    }

    #[test]
    fn good_balls_stay_good_when_shrunk(seed in 0u64..1000, amp in 0.0f64..0.95, r in 0.05f64..0.25, f in 0.1f64..1.0) {
        let g = grid32();
        let u = init::random_positive(g, seed, 1.0, amp);
        let c = g.domain_center();
        let big = classify_time(&u, &Region::ball(c, r)).unwrap();
        prop_assert_eq!(big.label == TimeLabel::Good, big.sup <= 2.0 * big.inf);
        if big.label == TimeLabel::Good {
            if let Ok(small) = classify_time(&u, &Region::ball(c, f * r)) {
                prop_assert_eq!(small.label, TimeLabel::Good);
            }
        }
    }

    #[test]
    fn power_law_fit_is_exact_and_scale_free(beta in 0.1f64..4.0, amp in 1e-6f64..1e3, k in 3usize..7) {
        let pts: Vec<(f64, f64)> = (0..k).map(|i| {
            let r = 0.01 * 1.7f64.powi(i as i32);
            (r, amp * r.powf(beta))
        }).collect();
        let fit = fit_decay(&pts).unwrap();
        prop_assert!((fit.beta - beta).abs() < 1e-10);
        prop_assert!(fit.residual_rms < 1e-12);
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(r, e)| (r, 7.5 * e)).collect();
        prop_assert!((fit_decay(&scaled).unwrap().beta - fit.beta).abs() < 1e-12);
    }

    #[test]
    fn holder_invariances(seed in 0u64..200, shift in -5.0f64..5.0, lam in 0.2f64..4.0) {
        let u = init::random_positive(grid32(), seed, 1.0, 0.5);
        let cands = [0.25, 0.5, 0.75, 1.0];
        let base = spatial_holder(&u, &cands, None).unwrap();
        let shifted = spatial_holder(&u.map(|v| v + shift), &cands, None).unwrap();
        let scaled = spatial_holder(&u.map(|v| lam * v), &cands, None).unwrap();
        prop_assert_eq!(base.estimate.sigma_x, shifted.estimate.sigma_x);
        prop_assert_eq!(base.estimate.sigma_x, scaled.estimate.sigma_x);
        prop_assert!((shifted.estimate.seminorm / base.estimate.seminorm - 1.0).abs() < 1e-9);
        prop_assert!((scaled.estimate.seminorm / (lam * base.estimate.seminorm) - 1.0).abs() < 1e-9);
        for w in base.curve.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn snapshot_bytes_round_trip(bits in proptest::collection::vec(any::<u64>(), 64), t in 0.0f64..1e9, n in 0.5f64..3.0) {
        let g = Grid::square(8, 2.0).unwrap();
        let values: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).map(|v| if v.is_finite() { v } else { 0.0 }).collect();
        let u = Field::new(g, values, t).unwrap();
        let back = decode_snapshot(&encode_snapshot(&u, n)).unwrap();
        prop_assert_eq!(back.n_exponent.to_bits(), n.to_bits());
        prop_assert_eq!(back.field.time().to_bits(), t.to_bits());
        for (a, b) in back.field.values().iter().zip(u.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
