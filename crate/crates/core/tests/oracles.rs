//! Comparisons against independent closed forms and a finite-difference
//! solver, none of which share code with the routines under test.

use std::f64::consts::PI;

use kjellberg::entire::zeros_from_quantile;
use kjellberg::{
    build_corollary, log_integral, solve, wos_measure, EntireProduct, Interval, IntervalSet,
    SolveOptions, WosConfig, ZeroSequence,
};
use num_complex::Complex64;

/// Harmonic measure of the outer boundary of `[-2, -1] × [-1/2, 1/2]` slit
/// along `[-1.75, -1.25]`, by five-point SOR on an `n × n` grid. Returns the
/// value at `(-1.5, 1/4)`.
fn fd_slit_square(n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mid = n / 2;
    let (s0, s1) = (n / 4, 3 * n / 4);
    let fixed = |i: usize, j: usize| {
        if i == 0 || j == 0 || i == n || j == n {
            Some(1.0)
        } else if j == mid && (s0..=s1).contains(&i) {
            Some(0.0)
        } else {
            None
        }
    };
    let mut u = vec![0.5; (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=n {
            if let Some(v) = fixed(i, j) {
                u[i * (n + 1) + j] = v;
            }
        }
    }
    let omega = 2.0 / (1.0 + (PI * h).sin());
    for _ in 0..20_000 {
        let mut change: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                if fixed(i, j).is_some() {
                    continue;
                }
                let k = i * (n + 1) + j;
                let avg = 0.25 * (u[k - 1] + u[k + 1] + u[k - n - 1] + u[k + n + 1]);
                let delta = omega * (avg - u[k]);
                u[k] += delta;
                change = change.max(delta.abs());
            }
        }
        if change < 1e-12 {
            break;
        }
    }
    u[(n / 2) * (n + 1) + mid + n / 4]
}

#[test]
fn walk_on_spheres_matches_finite_differences() {
    let slits = IntervalSet::new(vec![Interval::new(1.25, 1.75).unwrap()], false);
    let cfg = WosConfig {
        center: Complex64::new(-1.5, 0.0),
        half_side: 0.5,
        slits,
        epsilon: 1e-6,
        n_walks: 40_000,
        seed: 3,
        serial: false,
    };
    let est = wos_measure(&cfg, Complex64::new(-1.5, 0.25)).unwrap();
    let (coarse, fine) = (fd_slit_square(64), fd_slit_square(128));
    // The refinement difference bounds the discretization error of `fine`.
    let allowance = 3.0 * est.ci95 + (fine - coarse).abs();
    assert!(
        (est.omega_hat - fine).abs() <= allowance,
        "walk-on-spheres {} vs finite differences {fine} (coarse {coarse}), allowance {allowance}",
        est.omega_hat
    );
}

#[test]
fn walk_on_spheres_matches_the_midline_series() {
    // Slit along the whole midline: the upper half is the rectangle
    // [0, 1] × [0, 1/2] with data 0 on the bottom and 1 elsewhere, so
    // ω = 1 - Σ_{n odd} 4/(nπ) sin(nπx) sinh(nπ(1/2 - y))/sinh(nπ/2).
    let slits = IntervalSet::new(vec![Interval::new(1.0, 2.0).unwrap()], false);
    let cfg = WosConfig {
        center: Complex64::new(-1.5, 0.0),
        half_side: 0.5,
        slits,
        epsilon: 1e-6,
        n_walks: 40_000,
        seed: 11,
        serial: false,
    };
    for (x, y) in [(0.5, 0.25), (0.2, 0.1), (0.7, 0.4)] {
        let series: f64 = (0..200)
            .map(|k| {
                let n = (2 * k + 1) as f64;
                4.0 / (n * PI) * (n * PI * x).sin() * ((n * PI * (0.5 - y)).sinh() / (n * PI * 0.5).sinh())
            })
            .sum();
        let want = 1.0 - series;
        let est = wos_measure(&cfg, Complex64::new(-2.0 + x, y)).unwrap();
        assert!(
            (est.omega_hat - want).abs() <= 3.0 * est.ci95,
            "({x}, {y}): {} ± {} vs {want}",
            est.omega_hat,
            est.ci95
        );
    }
}

#[test]
fn canonical_product_matches_sinh() {
    // ∏ (1 + z/n²) = sinh(π√z)/(π√z); the dropped tail is about Re z / N.
    let n = 200_000;
    let zeros: Vec<f64> = (1..=n).map(|k| (k as f64).powi(2)).collect();
    let f = EntireProduct::new(ZeroSequence::from_sorted(&zeros).unwrap(), 0.0);
    for z in [Complex64::new(3.0, 0.0), Complex64::new(-2.5, 0.3), Complex64::new(1.0, 7.0), Complex64::new(-8.0, -4.0)] {
        let w = PI * z.sqrt();
        let want = (w.sinh() / w).norm().ln();
        let got = f.log_abs_f(z);
        assert!((got - want).abs() < 1e-4, "z = {z}: {got} vs {want}");
    }
}

#[test]
fn quantile_zeros_count_like_the_measure() {
    // μ(t) = t² has quantile √level, so x_n = √n and n(r) = ⌊r²⌋.
    let zs = zeros_from_quantile(400.0, f64::sqrt);
    assert_eq!(zs.count(), 400);
    for r in [0.5, 1.0, 3.3, 7.07, 12.5, 19.99, 20.0] {
        assert_eq!(zs.counting(r), (r * r).floor() as usize, "r = {r}");
    }
}

#[test]
fn corollary_log_integral_is_triangular() {
    // Each [b_n e^{-n}, b_n] carries log measure n.
    let set = build_corollary(0.25, 6).unwrap();
    for k in 1..=6u32 {
        let b = (f64::from(k * k)).exp();
        let got = log_integral(&set, b).unwrap();
        let want = f64::from(k * (k + 1) / 2);
        assert!((got - want).abs() < 1e-9 * want, "k = {k}: {got} vs {want}");
    }
}

#[test]
fn two_segments_vanish_on_the_set_and_are_conjugation_symmetric() {
    let set = IntervalSet::new(vec![Interval::new(1.0, 2.0).unwrap(), Interval::new(5.0, 9.0).unwrap()], false);
    let h = solve(&set, &SolveOptions::default()).unwrap();
    for t in [1.0, 1.37, 2.0, 5.0, 6.1, 8.99] {
        assert!(h.eval(Complex64::new(-t, 0.0)).abs() < 1e-8, "u(-{t}) = {}", h.eval(Complex64::new(-t, 0.0)));
    }
    for z in [Complex64::new(-3.0, 0.4), Complex64::new(2.0, 5.0), Complex64::new(-20.0, 1.0)] {
        assert!((h.eval(z) - h.eval(z.conj())).abs() < 1e-12);
    }
    assert!((h.eval(Complex64::new(1.0, 0.0)) - 1.0).abs() < 1e-10);
}
