//! The thirteen acceptance criteria as self-contained runs. Each builds its
//! own sets, so `check --only criterion-N` needs no prior artifacts.

use std::f64::consts::{E, PI};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use kjellberg::growth::{check_monotonicity, scaling_ratios, trusted_gaps};
use kjellberg::numeric::log_space;
use kjellberg::{
    approx_error, bracket, build_corollary, build_example_sodin, build_kjellberg, build_thick, check_annulus_harnack,
    check_beurling, check_min_type, harnack_check, oracle_green_segment, oracle_halfline, positivity_set, solve,
    verify_example_decay, window_fraction, EntireProduct, HarmonicApprox, Interval, IntervalSet, SolveOptions,
};
use num_complex::Complex64;

use crate::commands::{CALIBRATION_PHASE, TEST_PHASE};
use crate::{d1_grid, CliError};

pub const COUNT: usize = 13;

/// Pinned tolerances and sizes.
pub mod tol {
    pub const C1_REL: f64 = 1e-3;
    pub const C1_U0: f64 = 0.76894;
    pub const C1_U0_ABS: f64 = 1e-3;
    pub const C1_SECONDS: f64 = 1.0;
    pub const C2_REL: f64 = 0.05;
    pub const C2_SECONDS: f64 = 5.0;
    pub const C3_RADII: usize = 100;
    pub const C3_ANGLES: usize = 100;
    pub const C4_RHO_MAX: f64 = 0.30;
    pub const C4_BEURLING_MIN: f64 = 0.20;
    pub const C4_SECONDS: f64 = 30.0;
    pub const C5_GRID: usize = 10_000;
    pub const C5_C_STABILITY: f64 = 0.10;
    pub const C6_MATCH: f64 = 0.02;
    pub const C6_TARGET: f64 = 0.5;
    pub const C6_TARGET_TOL: f64 = 0.05;
    pub const C6_SAMPLES: usize = 4000;
    pub const C7_PAIRS: usize = 100;
    pub const C8_RADII: usize = 50;
    pub const C8_EQUALITY: f64 = 0.01;
    pub const C9_WALKS: usize = 100_000;
    pub const C9_RATIO_MAX: f64 = 3.0;
    pub const C9_SECONDS: f64 = 120.0;
    pub const C11_DECAY: f64 = 2.0;
    pub const C11_THICK_BAND: f64 = 1.5;
    pub const C12_SPREAD: f64 = 0.02;
}

pub const TITLES: [&str; COUNT] = [
    "oracle equivalence on a single segment",
    "half-line limit",
    "theta-monotonicity and sqrt envelope",
    "growth bracketing on the corollary set",
    "entire-function approximation bounds",
    "positivity set density",
    "Beurling inequality",
    "Harnack growth below the hyperbolic bound",
    "Sodin example decay",
    "annulus-core Harnack ratio",
    "minimal type vs thick set",
    "Kjellberg scaling",
    "deterministic reruns",
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn title(&self) -> &'static str {
        TITLES[self.id - 1]
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} ({}) [{:.1} s]: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title(),
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs criterion `id`. Criterion 13 drives the binary at `exe`.
pub fn run(id: usize, exe: Option<&Path>) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (passed, detail) = match id {
        1 => c1()?,
        2 => c2()?,
        3 => c3()?,
        4 => c4()?,
        5 => c5()?,
        6 => c6()?,
        7 => c7()?,
        8 => c8()?,
        9 => c9()?,
        10 => c10()?,
        11 => c11()?,
        12 => c12()?,
        13 => c13(exe.ok_or_else(|| CliError::Usage("criterion 13 needs the binary path".into()))?)?,
        _ => return Err(CliError::Usage(format!("no criterion {id}"))),
    };
    Ok(Outcome { id, passed, detail, elapsed: start.elapsed() })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single(lo: f64, hi: f64) -> Result<IntervalSet, CliError> {
    Ok(IntervalSet::new(vec![Interval::new(lo, hi)?], false))
}

/// The families every per-family criterion runs on, solved once per process.
fn families() -> Result<&'static [(String, HarmonicApprox)], CliError> {
    static CACHE: OnceLock<Result<Vec<(String, HarmonicApprox)>, String>> = OnceLock::new();
    let cached = CACHE.get_or_init(|| {
        let build = || -> Result<Vec<(String, HarmonicApprox)>, CliError> {
            let sets = [
                ("kjellberg(2,4,-6..6)", build_kjellberg(2.0, 4.0, -6, 6)?),
                ("corollary(0.25,5)", build_corollary(0.25, 5)?),
                ("sodin(200)", build_example_sodin(200)?),
                ("thick(0.5,10)", build_thick(0.5, 10)?),
            ];
            sets.into_iter()
                .map(|(name, set)| Ok((name.to_string(), solve(&set, &SolveOptions::default())?)))
                .collect()
        };
        build().map_err(|e| e.to_string())
    });
    cached.as_deref().map_err(|e| CliError::Usage(format!("family solve failed: {e}")))
}

fn halfline() -> Result<HarmonicApprox, CliError> {
    Ok(solve(&single(1e-3, 1e4)?, &SolveOptions::default())?)
}

fn c1() -> Result<(bool, String), CliError> {
    let t = Instant::now();
    let h = solve(&single(1.0, 2.0)?, &SolveOptions::default())?;
    let norm = oracle_green_segment(1.0, 2.0, c(1.0, 0.0))?;
    let mut points = vec![c(0.0, 0.0)];
    for k in 0..19 {
        let r = 0.25 + 9.75 * k as f64 / 18.0;
        let theta = -PI + 2.0 * PI * (k as f64 + 0.5) / 19.0;
        points.push(Complex64::from_polar(r, theta));
    }
    let mut worst: f64 = 0.0;
    for &z in &points {
        let want = oracle_green_segment(1.0, 2.0, z)? / norm;
        worst = worst.max((h.eval(z) / want - 1.0).abs());
    }
    let u0 = h.eval(c(0.0, 0.0));
    let secs = t.elapsed().as_secs_f64();
    let passed = worst <= tol::C1_REL && (u0 - tol::C1_U0).abs() <= tol::C1_U0_ABS && secs < tol::C1_SECONDS;
    Ok((passed, format!("max rel err {worst:.2e} at 20 points, u(0) = {u0:.6}, runtime {secs:.3} s")))
}

fn c2() -> Result<(bool, String), CliError> {
    let t = Instant::now();
    let h = halfline()?;
    let mut worst: f64 = 0.0;
    for r in log_space(1.0, 100.0, 9) {
        for k in 0..4 {
            let z = Complex64::from_polar(r, k as f64 * PI / 4.0);
            worst = worst.max((h.eval(z) / oracle_halfline(z) - 1.0).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let passed = worst <= tol::C2_REL && secs < tol::C2_SECONDS;
    Ok((passed, format!("max rel err {worst:.3e} over r in [1, 100], 4 angles, runtime {secs:.2} s")))
}

fn c3() -> Result<(bool, String), CliError> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, h) in families()? {
        let radii = log_space(0.1, h.trust_radius(), tol::C3_RADII);
        let (theta, env) = check_monotonicity(h, &radii, tol::C3_ANGLES);
        passed &= theta.passed && env.passed;
        parts.push(format!("{name}: theta {:.1e} env {:.1e}", theta.margin, env.margin));
    }
    Ok((passed, format!("{} samples per family; min margins {}", tol::C3_RADII * tol::C3_ANGLES, parts.join(", "))))
}

fn c4() -> Result<(bool, String), CliError> {
    let t = Instant::now();
    let set = build_corollary(0.25, 12)?;
    let a12 = set.intervals().last().map(|iv| iv.lo).unwrap_or(1.0);
    let h = solve(&set, &SolveOptions::default())?;
    let r = (a12 / 10.0).min(h.trust_radius());
    let b = bracket(&h, r)?;
    let secs = t.elapsed().as_secs_f64();
    let passed =
        b.holds() && b.rho_ratio <= tol::C4_RHO_MAX && b.beurling_ratio >= tol::C4_BEURLING_MIN && secs < tol::C4_SECONDS;
    Ok((
        passed,
        format!(
            "r = {r:.3e}: {:.4} <= log u/log r = {:.4} <= {:.4}; rho_upper/log r = {:.4} (<= {}), \
             Beurling = {:.4} (>= {}), runtime {secs:.1} s",
            b.lower,
            b.value,
            b.upper,
            b.rho_ratio,
            tol::C4_RHO_MAX,
            b.beurling_ratio,
            tol::C4_BEURLING_MIN
        ),
    ))
}

fn corollary_five() -> Result<(IntervalSet, HarmonicApprox, EntireProduct), CliError> {
    let set = build_corollary(0.25, 5)?;
    let h = solve(&set, &SolveOptions::default())?;
    let fp = EntireProduct::from_approx(&h);
    Ok((set, h, fp))
}

fn c5() -> Result<(bool, String), CliError> {
    let (set, h, fp) = corollary_five()?;
    let trust = h.trust_radius();
    let calib = d1_grid(&set, (E, trust), tol::C5_GRID, CALIBRATION_PHASE);
    let r_emp = approx_error(&fp, &h, &calib, E)?.r_emp.max(E);
    let grid = d1_grid(&set, (r_emp, trust), tol::C5_GRID, TEST_PHASE);
    let report = approx_error(&fp, &h, &grid, r_emp)?;
    let opts = SolveOptions::default().refined();
    let h2 = solve(&set, &opts)?;
    let fp2 = EntireProduct::from_approx(&h2);
    let refined = approx_error(&fp2, &h2, &grid, r_emp)?;
    let drift = (refined.fitted_c / report.fitted_c - 1.0).abs();
    let passed = grid.len() == tol::C5_GRID && report.upper_violations.is_empty() && drift <= tol::C5_C_STABILITY;
    Ok((
        passed,
        format!(
            "R_emp = {r_emp:.3e}, {} points, {} upper violations, C = {:.4}, refined C = {:.4} (drift {:.1}%)",
            grid.len(),
            report.upper_violations.len(),
            report.fitted_c,
            refined.fitted_c,
            100.0 * drift
        ),
    ))
}

fn c6() -> Result<(bool, String), CliError> {
    let (set, h, fp) = corollary_five()?;
    let window = (E, h.trust_radius());
    let complement = 1.0 - window_fraction(&set, window)?;
    let pos = positivity_set(&fp, &log_space(window.0, window.1, tol::C6_SAMPLES))?;
    let measured = window_fraction(&pos.set, window)?;
    let passed = (measured - complement).abs() <= tol::C6_MATCH
        && (complement - tol::C6_TARGET).abs() <= tol::C6_TARGET_TOL;
    Ok((
        passed,
        format!(
            "window [e, {:.3e}]: density of {{A > 0}} = {measured:.4}, complement of E* = {complement:.4}, \
             target {}",
            window.1,
            tol::C6_TARGET
        ),
    ))
}

fn c7() -> Result<(bool, String), CliError> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, (name, h)) in families()?.iter().enumerate() {
        let pairs = crate::commands::seeded_pairs(7 + k as u64, 1.0, h.trust_radius(), tol::C7_PAIRS);
        let rec = check_beurling(h, h.set(), &pairs);
        passed &= rec.passed && pairs.len() == tol::C7_PAIRS;
        parts.push(format!("{name}: {:.3e}", rec.margin));
    }
    Ok((passed, format!("{} pairs per family; min margins {}", tol::C7_PAIRS, parts.join(", "))))
}

fn c8() -> Result<(bool, String), CliError> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, h) in families()? {
        let radii = &log_space(1.0, h.trust_radius(), tol::C8_RADII + 1)[1..];
        let rep = harnack_check(h, radii)?;
        passed &= rep.passed();
        parts.push(format!("{name}: {} violations", rep.violations()));
    }
    let h = halfline()?;
    let rep = harnack_check(&h, &log_space(1.0, 100.0, tol::C8_RADII + 1)[1..])?;
    let dev = rep.samples.iter().map(|s| (s.growth / s.bound - 1.0).abs()).fold(0.0, f64::max);
    passed &= rep.passed() && dev <= tol::C8_EQUALITY;
    parts.push(format!("half-line: {} violations, max |growth/bound - 1| = {dev:.2e}", rep.violations()));
    Ok((passed, format!("{} radii per family; {}", tol::C8_RADII, parts.join(", "))))
}

fn c9() -> Result<(bool, String), CliError> {
    let t = Instant::now();
    let set = build_example_sodin(2000)?;
    let h = solve(&set, &SolveOptions::with_nodes(4))?;
    // -n lies on E, so u(-n) = 0; the comparison uses the gap midpoints.
    let (near, far) = (h.eval(c(-10.5, 0.0)), h.eval(c(-200.5, 0.0)));
    let radii = [25.0, 50.0, 100.0, 200.0];
    let rep = verify_example_decay(&h, &radii, tol::C9_WALKS, 9, false)?;
    let scaled = rep.scaled();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let decreasing = rep.samples.windows(2).all(|w| {
        let (a, b) = (w[0].estimate, w[1].estimate);
        a.omega_hat - a.ci95 > b.omega_hat + b.ci95
    });
    let decay = rep.record();
    let secs = t.elapsed().as_secs_f64();
    let u_ok = far < 0.5 * near;
    let passed = hi / lo <= tol::C9_RATIO_MAX && decreasing && u_ok && decay.passed && secs < tol::C9_SECONDS;
    let omegas: Vec<String> = rep.samples.iter().map(|s| format!("{:.4}", s.estimate.omega_hat)).collect();
    Ok((
        passed,
        format!(
            "omega_hat [{}], scaled max/min {:.3}, decreasing beyond CI {decreasing}; \
             u(-200.5)/u(-10.5) = {:.4} (< 0.5: {u_ok}); decay check margin {:.3e}; runtime {secs:.1} s",
            omegas.join(", "),
            hi / lo,
            far / near,
            decay.margin
        ),
    ))
}

fn c10() -> Result<(bool, String), CliError> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, h) in families()? {
        let gaps = trusted_gaps(h);
        let rec = check_annulus_harnack(h, &gaps)?;
        passed &= rec.passed;
        parts.push(format!("{name}: {} gaps, margin {:.3}", gaps.len(), rec.margin));
    }
    Ok((passed, parts.join(", ")))
}

fn c11() -> Result<(bool, String), CliError> {
    let kj = solve(&build_kjellberg(2.0, 4.0, 0, 30)?, &SolveOptions::default())?;
    let rep = check_min_type(&kj, 64);
    let thick = solve(&build_thick(0.5, 20)?, &SolveOptions::default())?;
    let env = check_min_type(&thick, 64).envelope;
    let (lo, hi) = env.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let band = (env[0] / lo).max(hi / env[0]);
    let passed = 1.0 / rep.decay_factor >= tol::C11_DECAY && band <= tol::C11_THICK_BAND;
    Ok((
        passed,
        format!(
            "Kjellberg(2,4) u/sqrt(r) decays by {:.3} over [1, {:.2e}]; thick(0.5) stays within factor {band:.3}",
            1.0 / rep.decay_factor,
            kj.trust_radius()
        ),
    ))
}

fn c12() -> Result<(bool, String), CliError> {
    let beta = 4.0;
    let set = build_kjellberg(2.0, beta, -12, 12)?;
    let h = solve(&set, &SolveOptions::default())?;
    let (l0, l1) = (set.intervals()[0].lo.ln(), h.trust_radius().ln());
    let (a, b) = (l0 + 0.25 * (l1 - l0), l1 - 0.25 * (l1 - l0));
    let mut points = Vec::new();
    for r in log_space(a.exp(), b.exp(), 20) {
        for theta in [0.0, 1.0, 2.5] {
            points.push(Complex64::from_polar(r, theta));
        }
    }
    let (lo, hi) = scaling_ratios(&h, beta, &points);
    let spread = hi / lo - 1.0;
    Ok((
        spread <= tol::C12_SPREAD,
        format!("u(4z)/u(z) in [{lo:.5}, {hi:.5}] over |z| in [{:.2e}, {:.2e}], spread {:.3}%", a.exp(), b.exp(), 100.0 * spread),
    ))
}

fn c13(exe: &Path) -> Result<(bool, String), CliError> {
    let root = std::env::temp_dir().join(format!("kjellberg-determinism-{}", std::process::id()));
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = root.join(run);
        let d = dir.to_string_lossy().to_string();
        let steps: [&[&str]; 5] = [
            &["solve", "--family", "sodin", "--n", "200", "--nodes", "4", "--out", &d],
            &["construct", "--out", &d],
            &["measure", "--out", &d, "--radii", "25,50", "--n-walks", "2000", "--seed", "13"],
            &["check", "--out", &d],
            &["report", "--out", &d],
        ];
        for args in steps {
            let status = Command::new(exe)
                .args(args.iter().copied())
                .arg("--deterministic")
                .output()
                .map_err(|e| CliError::Usage(format!("cannot run {}: {e}", exe.display())))?;
            // `check` may legitimately report failures (exit 1); anything else is fatal.
            if !matches!(status.status.code(), Some(0 | 1)) {
                return Err(CliError::Usage(format!(
                    "`{}` failed: {}",
                    args.join(" "),
                    String::from_utf8_lossy(&status.stderr)
                )));
            }
        }
        let mut files: Vec<_> = std::fs::read_dir(&dir)
            .map_err(|source| CliError::Io { path: d.clone(), source })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        let contents: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().to_string(), std::fs::read(p).unwrap_or_default()))
            .collect();
        outputs.push(contents);
    }
    let _ = std::fs::remove_dir_all(&root);
    let same = outputs[0] == outputs[1];
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    Ok((same && !names.is_empty(), format!("{} CSVs compared ({}), identical: {same}", names.len(), names.join(" "))))
}
