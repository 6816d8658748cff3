//! Growth profiles `A(r)`, `B(r)` and finite-range checks of the inequalities
//! governing class K: Beurling's lower bound, Barry's density bounds, the
//! minimal-type criterion, and the Harnack bound on annulus core circles.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::entire::EntireProduct;
use crate::error::{domain, Result};
use crate::intervals::{log_integral_between, DensityEstimate, IntervalSet};
use crate::numeric::{adaptive_simpson, log_space};
use crate::potential::HarmonicApprox;

/// Something whose circle extrema sit at `z = -r` (min) and `z = r` (max).
pub trait Radial: Sync {
    fn value(&self, z: Complex64) -> f64;
}

impl Radial for HarmonicApprox {
    fn value(&self, z: Complex64) -> f64 {
        self.eval(z)
    }
}

impl Radial for EntireProduct {
    fn value(&self, z: Complex64) -> f64 {
        self.log_abs_f(z)
    }
}

impl<F: Fn(Complex64) -> f64 + Sync> Radial for F {
    fn value(&self, z: Complex64) -> f64 {
        self(z)
    }
}

/// A named pass/fail outcome with its worst margin (positive is good).
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, margin: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, margin, detail: detail.into() }
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} margin={:.6e} {}", self.name, self.margin, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub order_fit: Option<OrderFit>,
    pub checks: Vec<CheckRecord>,
}

impl GrowthReport {
    /// Columns `r, A, B, B/√r`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,A,B,B_over_sqrt_r\n");
        for ((r, a), b) in self.radii.iter().zip(&self.a_values).zip(&self.b_values) {
            let _ = writeln!(s, "{r:e},{a:e},{b:e},{:e}", b / r.sqrt());
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let Some(fit) = &self.order_fit {
            let _ = writeln!(
                s,
                "order {:.6} lower_order {:.6} window [{:e}, {:e}]",
                fit.order, fit.lower_order, fit.window.0, fit.window.1
            );
        }
        for c in &self.checks {
            let _ = writeln!(s, "{c}");
        }
        s
    }
}

/// `A(r) = value(-r)`, `B(r) = value(r)` on the grid. When `verify_angles`
/// is set, 64 angles per radius confirm that nothing on the circle beats
/// those extrema (relative slack `1e-9`), recorded as a check.
pub fn profile(target: &impl Radial, r_grid: &[f64], verify_angles: bool) -> GrowthReport {
    let rows: Vec<(f64, f64, f64)> = r_grid
        .par_iter()
        .map(|&r| {
            let a = target.value(Complex64::new(-r, 0.0));
            let b = target.value(Complex64::new(r, 0.0));
            let mut worst = f64::INFINITY;
            if verify_angles {
                let tol = 1e-9 * b.abs().max(1e-300);
                for k in 0..64 {
                    let v = target.value(Complex64::from_polar(r, 2.0 * PI * k as f64 / 64.0));
                    worst = worst.min((b - v + tol).min(v - a + tol));
                }
            }
            (a, b, worst)
        })
        .collect();
    let mut checks = vec![];
    let ordered = rows.iter().map(|&(a, b, _)| b - a).fold(f64::INFINITY, f64::min);
    checks.push(CheckRecord::new("a_le_b", ordered >= 0.0, ordered, "min of B - A"));
    if verify_angles {
        let m = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
        checks.push(CheckRecord::new("axis_extrema", m >= 0.0, m, "64 angles per radius"));
    }
    GrowthReport {
        radii: r_grid.to_vec(),
        a_values: rows.iter().map(|r| r.0).collect(),
        b_values: rows.iter().map(|r| r.1).collect(),
        order_fit: None,
        checks,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub order: f64,
    pub lower_order: f64,
    pub window: (f64, f64),
}

/// Max and min of `log B(r)/log r` over the report's radii inside `window`
/// (finite-range stand-ins for limsup and liminf).
pub fn order_fit(report: &GrowthReport, window: (f64, f64)) -> Result<OrderFit> {
    let mut order = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for (&r, &b) in report.radii.iter().zip(&report.b_values) {
        if r < window.0 || r > window.1 {
            continue;
        }
        if !(r > 1.0) {
            return Err(domain("order window must lie in r > 1"));
        }
        if !(b > 0.0) {
            return Err(domain(format!("B({r}) = {b} is not positive")));
        }
        let q = b.ln() / r.ln();
        order = order.max(q);
        lower = lower.min(q);
    }
    if !order.is_finite() {
        return Err(domain("no radii inside the order window"));
    }
    Ok(OrderFit { order, lower_order: lower, window })
}

/// Beurling: `B(r2) > ½ exp(½ ∫_{E*∩(r1,r2)} dt/t) B(r1)`, checked in log
/// form at each pair; margin is `log B(r2)` minus the log of the bound.
pub fn check_beurling(target: &impl Radial, set: &IntervalSet, pairs: &[(f64, f64)]) -> CheckRecord {
    let mut worst = f64::INFINITY;
    let mut at = (0.0, 0.0);
    for &(r1, r2) in pairs {
        let b1 = target.value(Complex64::new(r1, 0.0));
        let b2 = target.value(Complex64::new(r2, 0.0));
        let bound = -(2f64.ln()) + 0.5 * log_integral_between(set, r1, r2) + b1.ln();
        let m = b2.ln() - bound;
        if m < worst {
            worst = m;
            at = (r1, r2);
        }
    }
    let passed = worst > 0.0 && worst.is_finite();
    CheckRecord::new("beurling", passed, worst, format!("{} pairs, worst at {at:?}", pairs.len()))
}

/// Barry with `α = ½`: `Λ̲{A > 0} >= 1 - 2ρ` and `Λ̄{A > 0} >= 1 - 2λ`, each
/// with `0.05` finite-range slack.
pub fn check_barry(positivity: &DensityEstimate, fit: &OrderFit) -> CheckRecord {
    let alpha = 0.5;
    let m1 = positivity.lower - (1.0 - fit.order / alpha - 0.05);
    let m2 = positivity.upper - (1.0 - fit.lower_order / alpha - 0.05);
    let m = m1.min(m2);
    CheckRecord::new(
        "barry",
        m >= 0.0,
        m,
        format!(
            "lower density {:.4} vs {:.4}, upper {:.4} vs {:.4}",
            positivity.lower,
            1.0 - fit.order / alpha,
            positivity.upper,
            1.0 - fit.lower_order / alpha
        ),
    )
}

#[derive(Debug, Clone)]
pub struct MinTypeReport {
    pub radii: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Last over first value of `u(r)/√r`.
    pub decay_factor: f64,
    pub monotone: bool,
    /// `(r, u(r), Poisson lower bound)`.
    pub poisson: Vec<(f64, f64, f64)>,
}

impl MinTypeReport {
    pub fn record(&self) -> CheckRecord {
        let m = self.poisson.iter().map(|&(_, u, lb)| u - lb).fold(f64::INFINITY, f64::min);
        CheckRecord::new(
            "min_type",
            m >= 0.0 && self.monotone,
            m,
            format!("decay factor {:.4}, envelope monotone {}", self.decay_factor, self.monotone),
        )
    }
}

/// `(√r/π) ∫_0^{T} u(-s) / (√s (s + r)) ds` with `T` the trust radius. The
/// dropped tail is nonnegative, so this stays a lower bound for `u(r)`.
pub fn poisson_lower_bound(h: &HarmonicApprox, r: f64) -> f64 {
    let set = h.set();
    let top = h.trust_radius();
    // In s = e^v the integrand is u(-e^v) e^{v/2}/(e^v + r); u vanishes on E*,
    // so only the gaps contribute.
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let first = set.intervals().first().map_or(top, |iv| iv.lo);
    if !set.includes_origin() || first > 0.0 {
        pieces.push((1e-12f64.min(first * 1e-6), first.min(top)));
    }
    for (c, d) in set.gaps() {
        if c < top {
            pieces.push((c, d.min(top)));
        }
    }
    if let Some(last) = set.intervals().last() {
        if last.hi < top {
            pieces.push((last.hi, top));
        }
    }
    let f = |v: f64| {
        let s = v.exp();
        h.eval(Complex64::new(-s, 0.0)) * (0.5 * v).exp() / (s + r)
    };
    let total: f64 = pieces
        .iter()
        .filter(|(a, b)| b > a)
        .map(|&(a, b)| adaptive_simpson(&f, a.ln(), b.ln(), 1e-10))
        .sum();
    r.sqrt() / PI * total
}

/// Envelope `u(r)/√r` over `samples` log-spaced radii in `[1, trust]`, and
/// the Poisson lower bound at 10 of them.
pub fn check_min_type(h: &HarmonicApprox, samples: usize) -> MinTypeReport {
    let radii = log_space(1.0, h.trust_radius(), samples.max(2));
    let envelope: Vec<f64> = radii.iter().map(|&r| h.eval(Complex64::new(r, 0.0)) / r.sqrt()).collect();
    let monotone = envelope.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6));
    let decay_factor = envelope.last().unwrap() / envelope[0];
    let poisson = log_space(1.0, h.trust_radius(), 10)
        .into_par_iter()
        .map(|r| (r, h.eval(Complex64::new(r, 0.0)), poisson_lower_bound(h, r)))
        .collect();
    MinTypeReport { radii, envelope, decay_factor, monotone, poisson }
}

/// On the core circle `|z| = √(cd)` of each gap `(c, d)`, `max u / min u`
/// against `exp(π²/log(d/c))`, 128 angles; margin is the worst
/// `log bound - log ratio`.
pub fn check_annulus_harnack(h: &HarmonicApprox, gaps: &[(f64, f64)]) -> Result<CheckRecord> {
    let mut worst = f64::INFINITY;
    let mut used = 0;
    for &(c, d) in gaps {
        if !(d > c && c > 0.0) {
            return Err(domain(format!("({c}, {d}) is not a gap")));
        }
        let core = (c * d).sqrt();
        if core > h.trust_radius() {
            return Err(domain(format!("core circle {core} outside the trust region")));
        }
        let vals: Vec<f64> =
            (0..128).map(|k| h.eval(Complex64::from_polar(core, 2.0 * PI * k as f64 / 128.0))).collect();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let log_bound = PI * PI / (d / c).ln();
        worst = worst.min(log_bound - (hi / lo).ln() + 1e-9);
        used += 1;
    }
    Ok(CheckRecord::new("annulus_harnack", worst >= 0.0, worst, format!("{used} gaps")))
}

/// Gaps of the set whose core circle lies within the trust region.
pub fn trusted_gaps(h: &HarmonicApprox) -> Vec<(f64, f64)> {
    h.set().gaps().into_iter().filter(|&(c, d)| (c * d).sqrt() <= h.trust_radius()).collect()
}

/// `log u` bracket at `r`: Beurling below, Harnack/hyperbolic above.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub r: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    /// `rho_upper(r)/log r` alone.
    pub rho_ratio: f64,
    /// `½ log_integral(E*, r)/log r - log 2/log r` alone.
    pub beurling_ratio: f64,
}

impl Bracket {
    pub fn holds(&self) -> bool {
        self.lower <= self.value && self.value <= self.upper
    }
}

pub fn bracket(h: &HarmonicApprox, r: f64) -> Result<Bracket> {
    if !(r > 1.0) {
        return Err(domain("bracket needs r > 1"));
    }
    let lr = r.ln();
    let beurling_ratio = 0.5 * log_integral_between(h.set(), 1.0, r) / lr - 2f64.ln() / lr;
    let rho = crate::hyperbolic::rho_upper(h.set(), r, false)?;
    let u1 = h.eval(Complex64::new(1.0, 0.0));
    Ok(Bracket {
        r,
        lower: beurling_ratio,
        value: h.eval(Complex64::new(r, 0.0)).ln() / lr,
        upper: rho / lr + u1.ln() / lr,
        rho_ratio: rho / lr,
        beurling_ratio,
    })
}

/// `u(re^{iθ})` nonincreasing in `θ ∈ [0, π]` with slack `1e-6·u(r)`, and
/// `u(r)/√r` nonincreasing in `r` with relative slack `1e-6`.
pub fn check_monotonicity(h: &HarmonicApprox, radii: &[f64], angles: usize) -> (CheckRecord, CheckRecord) {
    let worst_theta = radii
        .par_iter()
        .map(|&r| {
            let scale = h.eval(Complex64::new(r, 0.0));
            let vals: Vec<f64> = (0..angles)
                .map(|k| h.eval(Complex64::from_polar(r, PI * k as f64 / (angles - 1) as f64)))
                .collect();
            vals.windows(2).map(|w| w[0] - w[1] + 1e-6 * scale).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let env: Vec<f64> = radii.iter().map(|&r| h.eval(Complex64::new(r, 0.0)) / r.sqrt()).collect();
    let worst_env = env.windows(2).map(|w| w[0] * (1.0 + 1e-6) - w[1]).fold(f64::INFINITY, f64::min);
    let n = radii.len() * angles;
    (
        CheckRecord::new("theta_monotone", worst_theta >= 0.0, worst_theta, format!("{n} samples")),
        CheckRecord::new("sqrt_envelope", worst_env >= 0.0, worst_env, format!("{} radii", radii.len())),
    )
}

/// `u(βz)/u(z)` over the given points: `(min, max)`.
pub fn scaling_ratios(h: &HarmonicApprox, beta: f64, points: &[Complex64]) -> (f64, f64) {
    points.iter().map(|&z| h.eval(z * beta) / h.eval(z)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
        (lo.min(q), hi.max(q))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::Interval;
    use crate::potential::{oracle_halfline, solve};
    use approx::assert_relative_eq;

    #[test]
    fn synthetic_orders() {
        let radii = log_space(10.0, 1e6, 30);
        let quarter = |z: Complex64| z.norm().powf(0.25);
        let rep = profile(&quarter, &radii, false);
        let fit = order_fit(&rep, (10.0, 1e6)).unwrap();
        assert_relative_eq!(fit.order, 0.25, epsilon = 1e-12);
        assert_relative_eq!(fit.lower_order, 0.25, epsilon = 1e-12);
        let rep = profile(&oracle_halfline, &radii, true);
        assert!(rep.a_values.iter().all(|a| a.abs() < 1e-9));
        assert!(rep.checks.iter().all(|c| c.passed));
        let fit = order_fit(&rep, (10.0, 1e6)).unwrap();
        assert_relative_eq!(fit.order, 0.5, epsilon = 1e-12);
        assert!(rep.to_csv().lines().count() == 31);
    }

    #[test]
    fn beurling_special_cases() {
        let set = IntervalSet::new(vec![Interval::new(1.0, 4.0).unwrap()], false);
        // For the half-line B(4) = 2 B(1) exceeds the bound B(1).
        let rec = check_beurling(&oracle_halfline, &set, &[(1.0, 4.0)]);
        assert!(rec.passed);
        assert_relative_eq!(rec.margin, 2f64.ln(), epsilon = 1e-12);
        let empty = IntervalSet::empty();
        let rec = check_beurling(&oracle_halfline, &empty, &[(2.0, 3.0)]);
        assert!(rec.passed);
    }

    #[test]
    fn barry_thresholds() {
        let fit = OrderFit { order: 0.25, lower_order: 0.25, window: (2.0, 10.0) };
        let d = DensityEstimate { upper: 0.5, lower: 0.46, window: (2.0, 10.0), samples: 10 };
        assert!(check_barry(&d, &fit).passed);
        let d = DensityEstimate { upper: 0.5, lower: 0.4, window: (2.0, 10.0), samples: 10 };
        assert!(!check_barry(&d, &fit).passed);
        let fit = OrderFit { order: 0.5, lower_order: 0.5, window: (2.0, 10.0) };
        let d = DensityEstimate { upper: 0.0, lower: 0.0, window: (2.0, 10.0), samples: 10 };
        assert!(check_barry(&d, &fit).passed);
    }

    #[test]
    fn segment_profile_and_annulus() {
        let set = IntervalSet::new(vec![Interval::new(1.0, 2.0).unwrap()], false);
        let h = solve(&set, &Default::default()).unwrap();
        let rep = profile(&h, &[3.0], true);
        assert!(rep.a_values[0] > 0.0);
        assert!(rep.checks.iter().all(|c| c.passed), "{}", rep.summary());

        // A far segment leaves the unit circle nearly level: ratio close to 1
        // and well inside the bound for a very wide gap.
        let far = IntervalSet::new(vec![Interval::new(1e-4, 2e-4).unwrap(), Interval::new(1e6, 2e6).unwrap()], false);
        let h = solve(&far, &Default::default()).unwrap();
        let rec = check_annulus_harnack(&h, &[(2e-4, 1e6)]).unwrap();
        assert!(rec.passed, "{rec}");
        assert_relative_eq!((PI * PI / (2f64 * PI).exp().ln()).exp(), 4.81048, epsilon = 1e-5);
    }

    #[test]
    fn poisson_bound_at_one_on_a_segment() {
        let set = IntervalSet::new(vec![Interval::new(1.0, 50.0).unwrap()], false);
        let h = solve(&set, &Default::default()).unwrap();
        let lb = poisson_lower_bound(&h, 1.0);
        assert!(lb > 0.0 && lb <= 1.0, "{lb}");
    }
}
