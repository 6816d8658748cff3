//! Slit sets on the negative real axis.
//!
//! A closed set `E ⊂ (-∞, 0]` is stored through its positive mirror
//! `E* = {|x| : x ∈ E}` as an ordered list of disjoint closed intervals, plus a
//! flag recording whether the origin belongs to `E`. The sign flip only happens
//! in evaluation code (`dist_to_e`, the potential solver).

use std::fmt;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::numeric::{fnv1a64, log_space};

/// A closed interval `[lo, hi]` of the positive mirror `E*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
            return Err(Error::InvalidInput(format!(
                "interval [{lo}, {hi}] must satisfy 0 <= lo <= hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// `∫ dt/t` over `[lo, hi] ∩ (lo_cut, hi_cut)`, zero when the overlap is empty.
    pub fn log_measure_within(&self, lo_cut: f64, hi_cut: f64) -> f64 {
        let a = self.lo.max(lo_cut);
        let b = self.hi.min(hi_cut);
        if b > a {
            (b / a).ln()
        } else {
            0.0
        }
    }
}

/// Parameters of the named constructions, kept for headers and reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Kjellberg { alpha: f64, beta: f64, n_min: i32, n_max: i32 },
    Corollary { rho: f64, n_max: u32 },
    Sodin { n_max: u32 },
    Thick { p: f64, n_max: u32 },
    Explicit,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Kjellberg { alpha, beta, n_min, n_max } => {
                write!(f, "kjellberg alpha={alpha} beta={beta} n_min={n_min} n_max={n_max}")
            }
            Family::Corollary { rho, n_max } => write!(f, "corollary rho={rho} n_max={n_max}"),
            Family::Sodin { n_max } => write!(f, "sodin n_max={n_max}"),
            Family::Thick { p, n_max } => write!(f, "thick p={p} n_max={n_max}"),
            Family::Explicit => write!(f, "explicit"),
        }
    }
}

/// The mirror set `E*` as disjoint, strictly increasing closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
    includes_origin: bool,
    family: Family,
    merged: usize,
}

impl IntervalSet {
    /// Sorts the input and merges touching or overlapping intervals. The number
    /// of merges performed is kept as a diagnostic (`merge_count`).
    pub fn new(mut intervals: Vec<Interval>, includes_origin: bool) -> Self {
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
        let mut merged = 0;
        for iv in intervals {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    last.hi = last.hi.max(iv.hi);
                    merged += 1;
                }
                _ => out.push(iv),
            }
        }
        Self { intervals: out, includes_origin, family: Family::Explicit, merged }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), false)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn includes_origin(&self) -> bool {
        self.includes_origin
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn merge_count(&self) -> usize {
        self.merged
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Largest right endpoint, or 0 for the empty set.
    pub fn max_endpoint(&self) -> f64 {
        self.intervals.last().map_or(0.0, |iv| iv.hi)
    }

    /// Complementary open intervals `(c_n, d_n) = (hi_n, lo_{n+1})`.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0].hi, w[1].lo)).collect()
    }

    /// Whether `x >= 0` lies in `E*` (the origin counts when it belongs to `E`).
    pub fn contains(&self, x: f64) -> bool {
        if x == 0.0 && self.includes_origin {
            return true;
        }
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    /// The union of `self` with extra intervals, renormalized.
    pub fn union_with(&self, extra: &[Interval]) -> Self {
        let mut all = self.intervals.clone();
        all.extend_from_slice(extra);
        Self::new(all, self.includes_origin).with_family(self.family.clone())
    }

    /// Restriction of `E*` to `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Self {
        let ivs = self
            .intervals
            .iter()
            .filter(|iv| iv.hi >= lo && iv.lo <= hi)
            .map(|iv| Interval { lo: iv.lo.max(lo), hi: iv.hi.min(hi) })
            .collect();
        Self::new(ivs, self.includes_origin && lo <= 0.0).with_family(self.family.clone())
    }

    /// Plain-text form: a `#` header naming the family, then `lo hi` per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("# {} origin={}\n", self.family, u8::from(self.includes_origin));
        for iv in &self.intervals {
            s.push_str(&format!("{:?} {:?}\n", iv.lo, iv.hi));
        }
        s
    }

    /// Parses the format written by [`IntervalSet::to_text`]. Only the
    /// `origin=` header key is interpreted; the family is informational.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut origin = false;
        let mut ivs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for tok in header.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("origin=") {
                        origin = matches!(v, "1" | "true");
                    }
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| Error::Parse { line: no + 1, message: "expected `lo hi`".into() })?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse { line: no + 1, message: e.to_string() })
            };
            let lo = parse(it.next())?;
            let hi = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse { line: no + 1, message: "trailing tokens".into() });
            }
            ivs.push(Interval::new(lo, hi)?);
        }
        Ok(Self::new(ivs, origin))
    }

    /// Fingerprint of the interval data and origin flag (the family label is
    /// not part of it, so a set read back from text hashes identically).
    pub fn content_hash(&self) -> u64 {
        let mut s = format!("origin={}\n", u8::from(self.includes_origin));
        for iv in &self.intervals {
            s.push_str(&format!("{:?} {:?}\n", iv.lo, iv.hi));
        }
        fnv1a64(s.as_bytes())
    }
}

/// Kjellberg's set `{0} ∪ ⋃ [-αβ^n, -β^n]`, mirrored: intervals `[β^n, αβ^n]`.
pub fn build_kjellberg(alpha: f64, beta: f64, n_min: i32, n_max: i32) -> Result<IntervalSet> {
    if !(alpha > 1.0 && beta > alpha) {
        return Err(Error::InvalidInput(format!("need 1 < alpha < beta, got alpha={alpha}, beta={beta}")));
    }
    if n_min > n_max {
        return Err(Error::InvalidInput(format!("n_min={n_min} exceeds n_max={n_max}")));
    }
    let ivs = (n_min..=n_max)
        .map(|n| {
            let lo = beta.powi(n);
            Interval::new(lo, alpha * lo)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalSet::new(ivs, true).with_family(Family::Kjellberg { alpha, beta, n_min, n_max }))
}

/// Intervals `[a_n, b_n]` with `b_n = exp(n²/(4ρ))`, `a_n = b_n e^{-n}`, or
/// `b_n = exp(n³)` when `ρ = 0`.
pub fn build_corollary(rho: f64, n_max: u32) -> Result<IntervalSet> {
    if !(0.0..0.5).contains(&rho) {
        return Err(Error::InvalidInput(format!("rho must lie in [0, 1/2), got {rho}")));
    }
    let mut ivs = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let nf = f64::from(n);
        let log_b = if rho == 0.0 { nf.powi(3) } else { nf * nf / (4.0 * rho) };
        let b = log_b.exp();
        if !b.is_finite() {
            return Err(Error::InvalidInput(format!("b_{n} = exp({log_b}) overflows")));
        }
        ivs.push(Interval::new((log_b - nf).exp(), b)?);
    }
    Ok(IntervalSet::new(ivs, false).with_family(Family::Corollary { rho, n_max }))
}

/// The slits `[n, n + 1/n]`, `1 <= n <= n_max`.
pub fn build_example_sodin(n_max: u32) -> Result<IntervalSet> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let ivs = (1..=n_max)
        .map(|n| {
            let nf = f64::from(n);
            Interval::new(nf, nf + 1.0 / nf)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalSet::new(ivs, false).with_family(Family::Sodin { n_max }))
}

/// `a_0 = 1`, `b_n = 2 a_n`, `a_{n+1} = b_n + b_n^p`.
pub fn build_thick(p: f64, n_max: u32) -> Result<IntervalSet> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("p must lie in (0, 1), got {p}")));
    }
    let mut ivs = Vec::with_capacity(n_max as usize + 1);
    let mut a = 1.0_f64;
    for _ in 0..=n_max {
        let b = 2.0 * a;
        ivs.push(Interval::new(a, b)?);
        a = b + b.powf(p);
    }
    Ok(IntervalSet::new(ivs, false).with_family(Family::Thick { p, n_max }))
}

/// `∫_{S ∩ (1, r)} dt/t`.
pub fn log_integral(set: &IntervalSet, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(domain(format!("log_integral needs r > 1, got {r}")));
    }
    Ok(log_integral_between(set, 1.0, r))
}

/// `∫_{S ∩ (r1, r2)} dt/t` for `0 < r1 <= r2`.
pub(crate) fn log_integral_between(set: &IntervalSet, r1: f64, r2: f64) -> f64 {
    set.intervals()
        .iter()
        .take_while(|iv| iv.lo < r2)
        .map(|iv| iv.log_measure_within(r1, r2))
        .sum()
}

/// Finite-window estimate of the upper and lower logarithmic densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub upper: f64,
    pub lower: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

impl DensityEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }
}

/// Max and min of `log_integral(S, r) / log r` over log-spaced radii in the
/// window, augmented with every interval endpoint inside it (the quotient is
/// piecewise monotone between endpoints, so the extrema sit there).
pub fn log_densities(set: &IntervalSet, window: (f64, f64), samples: usize) -> Result<DensityEstimate> {
    let (r_min, r_max) = window;
    if !(r_min > 1.0 && r_max > r_min) {
        return Err(domain(format!("density window must satisfy 1 < r_min < r_max, got {window:?}")));
    }
    if samples < 2 {
        return Err(domain("density estimation needs at least 2 samples"));
    }
    let mut radii = log_space(r_min, r_max, samples);
    for iv in set.intervals() {
        for e in [iv.lo, iv.hi] {
            if e > r_min && e < r_max {
                radii.push(e);
            }
        }
    }
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for &r in &radii {
        let q = log_integral_between(set, 1.0, r) / r.ln();
        upper = upper.max(q);
        lower = lower.min(q);
    }
    Ok(DensityEstimate { upper, lower, window, samples: radii.len() })
}

/// Share of the window `(r1, r2)` covered by `S`, in logarithmic measure:
/// `∫_{S ∩ (r1, r2)} dt/t / log(r2/r1)`.
pub fn window_fraction(set: &IntervalSet, window: (f64, f64)) -> Result<f64> {
    let (r1, r2) = window;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(domain(format!("window must satisfy 0 < r1 < r2, got {window:?}")));
    }
    Ok(log_integral_between(set, r1, r2) / (r2 / r1).ln())
}

/// Euclidean distance from `z` to `E = {-t : t ∈ E*}` (plus the origin when
/// it belongs to `E`). Infinite for the empty set.
pub fn dist_to_e(set: &IntervalSet, z: Complex64) -> f64 {
    let x = -z.re;
    let y = z.im.abs();
    let mut best = f64::INFINITY;
    if set.includes_origin {
        best = z.norm();
    }
    let ivs = set.intervals();
    let idx = ivs.partition_point(|iv| iv.hi < x);
    for iv in ivs[idx.saturating_sub(1)..(idx + 1).min(ivs.len())].iter() {
        let dx = if x < iv.lo {
            iv.lo - x
        } else if x > iv.hi {
            x - iv.hi
        } else {
            0.0
        };
        best = best.min(dx.hypot(y));
    }
    best
}

/// Membership in `D_1 = C \ {z : dist(z, E) <= 1}`.
pub fn in_d1(set: &IntervalSet, z: Complex64) -> bool {
    dist_to_e(set, z) > 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn kjellberg_small() {
        let s = build_kjellberg(2.0, 4.0, 0, 1).unwrap();
        assert_eq!(s.intervals(), &[iv(1.0, 2.0), iv(4.0, 8.0)]);
        assert!(s.includes_origin());
        assert!(matches!(build_kjellberg(3.0, 2.0, 0, 1), Err(Error::InvalidInput(_))));
        assert!(matches!(build_kjellberg(2.0, 4.0, 2, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn kjellberg_density_over_whole_periods() {
        let s = build_kjellberg(2.0, 4.0, 0, 2).unwrap();
        // the window [1, 4^3) is covered by exactly three periods
        let q = log_integral(&s, 64.0).unwrap() / 64f64.ln();
        assert_relative_eq!(q, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn corollary_endpoints() {
        let s = build_corollary(0.25, 3).unwrap();
        let last = s.intervals().last().unwrap();
        assert_relative_eq!(last.hi, 8103.083927575384, max_relative = 1e-14);
        assert_relative_eq!(last.lo, 403.4287934927351, max_relative = 1e-14);
        // [1,1] and [1,e] touch and are merged
        assert_eq!(s.intervals()[0], iv(1.0, std::f64::consts::E));
        assert_eq!(s.merge_count(), 1);
        assert!(!s.includes_origin());

        let s0 = build_corollary(0.0, 2).unwrap();
        assert_relative_eq!(s0.max_endpoint(), 8f64.exp(), max_relative = 1e-14);
        assert!(build_corollary(0.5, 3).is_err());
    }

    #[test]
    fn sodin_merges_touching_pair() {
        let s = build_example_sodin(3).unwrap();
        assert_eq!(s.intervals().len(), 2);
        assert_eq!(s.intervals()[0], iv(1.0, 2.5));
        assert_relative_eq!(s.intervals()[1].hi, 10.0 / 3.0);
        assert_eq!(build_example_sodin(1).unwrap().intervals(), &[iv(1.0, 2.0)]);
    }

    #[test]
    fn thick_recurrence() {
        let s = build_thick(0.5, 1).unwrap();
        let ivs = s.intervals();
        assert_eq!(ivs[0], iv(1.0, 2.0));
        assert_relative_eq!(ivs[1].lo, 2.0 + 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(ivs[1].hi, 2.0 * (2.0 + 2f64.sqrt()), epsilon = 1e-14);
        let big = build_thick(0.5, 30).unwrap();
        for (n, iv) in big.intervals().iter().enumerate() {
            assert!(iv.hi >= 2f64.powi(n as i32));
        }
        assert_eq!(build_thick(0.9, 0).unwrap().intervals(), &[iv(1.0, 2.0)]);
    }

    #[test]
    fn log_integral_closed_forms() {
        let e = std::f64::consts::E;
        let s = IntervalSet::new(vec![iv(1.0, e), iv(e * e, e.powi(3))], false);
        assert_relative_eq!(log_integral(&s, e.powi(3)).unwrap(), 2.0, epsilon = 1e-14);
        let s1 = IntervalSet::new(vec![iv(1.0, e)], false);
        assert_relative_eq!(log_integral(&s1, e).unwrap(), 1.0, epsilon = 1e-15);
        assert!(log_integral(&s1, 1.0).is_err());
    }

    #[test]
    fn kjellberg_log_integral_matches_quadrature() {
        for n in 0..6 {
            let s = build_kjellberg(2.0, 4.0, 0, n).unwrap();
            let r = 4f64.powi(n + 1);
            let exact = f64::from(n + 1) * 2f64.ln();
            assert_relative_eq!(log_integral(&s, r).unwrap(), exact, epsilon = 1e-12);
            // independent route: quadrature of 1_S(t)/t
            let breaks: Vec<f64> = s.intervals().iter().flat_map(|iv| [iv.lo, iv.hi]).collect();
            let f = |t: f64| if s.contains(t) { 1.0 / t } else { 0.0 };
            let q = crate::numeric::integrate_with_breaks(&f, 1.0, r, &breaks, 1e-11);
            assert_relative_eq!(q, exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn densities() {
        let s = build_kjellberg(2.0, 4.0, 0, 20).unwrap();
        let d = log_densities(&s, (4f64.powi(5), 4f64.powi(20)), 200).unwrap();
        // extrema sit at the window's first right endpoint 2·4^5 and at left endpoints
        assert_relative_eq!(d.upper, 6.0 / 11.0, epsilon = 1e-12);
        assert_relative_eq!(d.lower, 0.5, epsilon = 1e-12);
        let tail = log_densities(&s, (4f64.powi(15), 4f64.powi(20)), 200).unwrap();
        assert!((tail.upper - 0.5).abs() <= 0.02 && (tail.lower - 0.5).abs() <= 0.02);

        let empty = log_densities(&IntervalSet::empty(), (2.0, 100.0), 10).unwrap();
        assert_eq!((empty.upper, empty.lower), (0.0, 0.0));

        let ray = IntervalSet::new(vec![iv(1.0, 1e6)], false);
        let d = log_densities(&ray, (2.0, 1e6), 50).unwrap();
        assert_relative_eq!(d.upper, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d.lower, 1.0, epsilon = 1e-12);
        assert!(log_densities(&ray, (1.0, 10.0), 10).is_err());
    }

    #[test]
    fn distances() {
        let s = IntervalSet::new(vec![iv(1.0, 2.0)], false);
        let d = dist_to_e(&s, Complex64::new(-1.5, 1.0));
        assert_relative_eq!(d, 1.0);
        assert!(!in_d1(&s, Complex64::new(-1.5, 1.0)));
        assert_relative_eq!(dist_to_e(&s, Complex64::new(3.0, 0.0)), 4.0);
        assert!(in_d1(&s, Complex64::new(3.0, 0.0)));
        assert_relative_eq!(dist_to_e(&s, Complex64::new(-4.0, 0.0)), 2.0);
    }

    #[test]
    fn text_round_trip_and_gaps() {
        let s = build_kjellberg(2.0, 4.0, -1, 1).unwrap();
        let back = IntervalSet::from_text(&s.to_text()).unwrap();
        assert_eq!(back.intervals(), s.intervals());
        assert!(back.includes_origin());
        assert_eq!(s.gaps(), vec![(0.5, 1.0), (2.0, 4.0)]);
        assert!(IntervalSet::from_text("1 2 3\n").is_err());
    }
}
