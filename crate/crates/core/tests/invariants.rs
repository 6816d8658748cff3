use std::f64::consts::PI;

use kjellberg::entire::zeros_from_quantile;
use kjellberg::hyperbolic::BoundGeometry;
use kjellberg::{
    log_integral, solve, window_fraction, wos_measure, EntireProduct, Interval, IntervalSet, SolveOptions, WosConfig,
    ZeroSequence,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn raw_intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..1e4, 0.0f64..3.0), 1..12)
}

fn to_set(raw: &[(f64, f64)], origin: bool) -> IntervalSet {
    let ivs = raw.iter().map(|&(lo, w)| Interval::new(lo, lo * (1.0 + w)).unwrap()).collect();
    IntervalSet::new(ivs, origin)
}

/// Well-separated sets small enough to solve in a test: 1–3 intervals.
fn solvable_set() -> impl Strategy<Value = IntervalSet> {
    (1.5f64..3.0, prop::collection::vec((0.1f64..1.0, 1.5f64..4.0), 1..4)).prop_map(|(start, steps)| {
        let mut lo = start;
        let mut ivs = Vec::new();
        for (len, gap) in steps {
            let hi = lo * (1.0 + len);
            ivs.push(Interval::new(lo, hi).unwrap());
            lo = hi * gap;
        }
        IntervalSet::new(ivs, false)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(raw in raw_intervals(), origin in any::<bool>()) {
        let set = to_set(&raw, origin);
        let again = IntervalSet::new(set.intervals().to_vec(), origin);
        prop_assert_eq!(again.intervals(), set.intervals());
        prop_assert_eq!(again.merge_count(), 0);
        for w in set.intervals().windows(2) {
            prop_assert!(w[0].hi < w[1].lo);
        }
        for &(lo, _) in &raw {
            prop_assert!(set.contains(lo));
        }
        let back = IntervalSet::from_text(&set.to_text()).unwrap();
        prop_assert_eq!(back.intervals(), set.intervals());
        prop_assert_eq!(back.content_hash(), set.content_hash());
    }

    #[test]
    fn log_integral_is_monotone_and_bounded(raw in raw_intervals(), a in 1.001f64..1e3, f in 1.0f64..1e3) {
        let set = to_set(&raw, false);
        let (r1, r2) = (a, a * f);
        let (i1, i2) = (log_integral(&set, r1).unwrap(), log_integral(&set, r2).unwrap());
        prop_assert!(i1 >= 0.0 && i1 <= r1.ln() * (1.0 + 1e-12));
        prop_assert!(i2 >= i1 - 1e-12);
        prop_assert!(i2 - i1 <= (r2 / r1).ln() * (1.0 + 1e-12) + 1e-12);
        if f > 1.0 {
            let frac = window_fraction(&set, (r1, r2)).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&frac));
            prop_assert!((frac * (r2 / r1).ln() - (i2 - i1)).abs() <= 1e-9 * (1.0 + i2));
        }
    }

    #[test]
    fn hyperbolic_bound_grows_with_r(raw in raw_intervals(), r in 1.01f64..1e4, f in 1.0f64..10.0) {
        let geo = BoundGeometry::new(&to_set(&raw, false));
        let (a, b) = (geo.rho_upper(r, false).unwrap(), geo.rho_upper(r * f, false).unwrap());
        prop_assert!(a >= 0.0 && a.is_finite());
        prop_assert!(b >= a * (1.0 - 1e-9));
        prop_assert!(geo.beta(r) >= 0.0);
    }

    #[test]
    fn quantile_zeros_trail_the_measure_by_less_than_one(total in 1.0f64..5e3, p in 0.3f64..3.0, r in 0.01f64..50.0) {
        // μ(t) = t^p on [0, total^{1/p}].
        let zs = zeros_from_quantile(total, |level| level.powf(1.0 / p));
        let mu = r.powf(p).min(total);
        let gap = mu - zs.counting(r) as f64;
        prop_assert!(gap > -1e-9 && gap < 1.0, "mu = {}, n = {}", mu, zs.counting(r));
    }

    #[test]
    fn axis_extrema_of_negative_zero_products(
        mut xs in prop::collection::vec(0.1f64..1e3, 1..40),
        r in 0.01f64..1e4,
        theta in -PI..PI,
        log_c in -5.0f64..5.0,
    ) {
        xs.sort_by(f64::total_cmp);
        let f = EntireProduct::new(ZeroSequence::from_sorted(&xs).unwrap(), log_c);
        let v = f.log_abs_f(Complex64::from_polar(r, theta));
        let tol = 1e-9 * (1.0 + v.abs());
        prop_assert!(f.min_modulus(r).unwrap() <= v + tol);
        prop_assert!(v <= f.max_modulus(r).unwrap() + tol);
    }

    #[test]
    fn shifting_removes_exactly_the_leading_factors(
        mut xs in prop::collection::vec(0.1f64..1e3, 3..30),
        k in 1usize..3,
        z in (-50.0f64..50.0, 0.1f64..50.0),
    ) {
        xs.sort_by(f64::total_cmp);
        let f = EntireProduct::new(ZeroSequence::from_sorted(&xs).unwrap(), 1.5);
        let g = f.shifted_variant(k).unwrap();
        let z = Complex64::new(z.0, z.1);
        let removed: f64 = xs[..k].iter().map(|&x| (1.0 + z / x).norm().ln()).sum();
        let want = f.log_abs_f(z) - 1.5 - removed;
        prop_assert!((g.log_abs_f(z) - want).abs() < 1e-9 * (1.0 + want.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solved_functions_decrease_in_angle_and_envelope(set in solvable_set(), r in 0.2f64..3.0) {
        let h = solve(&set, &SolveOptions::default()).unwrap();
        let radii = [r, 2.0 * r, 4.0 * r];
        for &rr in &radii {
            let scale = h.eval(Complex64::new(rr, 0.0));
            let mut prev = f64::INFINITY;
            for k in 0..=48 {
                let v = h.eval(Complex64::from_polar(rr, PI * k as f64 / 48.0));
                prop_assert!(v <= prev + 1e-6 * scale, "r = {}, k = {}", rr, k);
                prev = v;
            }
        }
        let env: Vec<f64> = radii.iter().map(|&rr| h.eval(Complex64::new(rr, 0.0)) / rr.sqrt()).collect();
        prop_assert!(env.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)));
    }

    #[test]
    fn walk_estimates_do_not_depend_on_scheduling(seed in any::<u64>(), y in 0.05f64..0.4) {
        let cfg = WosConfig {
            center: Complex64::new(-1.5, 0.0),
            half_side: 0.5,
            slits: IntervalSet::new(vec![Interval::new(1.2, 1.6).unwrap()], false),
            epsilon: 1e-6,
            n_walks: 2000,
            seed,
            serial: true,
        };
        let start = Complex64::new(-1.4, y);
        let serial = wos_measure(&cfg, start).unwrap();
        let parallel = wos_measure(&WosConfig { serial: false, ..cfg }, start).unwrap();
        prop_assert_eq!(serial, parallel);
        prop_assert!((0.0..=1.0).contains(&serial.omega_hat));
    }
}
