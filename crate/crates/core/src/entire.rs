//! Entire functions with negative zeros obtained by discretizing a Riesz
//! measure: the `n`-th zero sits where the cumulative mass first reaches `n`,
//! so `log|f| = u(0) + Σ log|1 + z/x_n|` tracks `u` up to `O(log|z|)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::intervals::{in_d1, log_densities, DensityEstimate, Interval, IntervalSet};
use crate::measure::{log_abs_1p, RieszMeasure};
use crate::numeric::CompensatedSum;
use crate::potential::HarmonicApprox;

/// Positive zeros `x_n` (the zeros of `f` are `-x_n`), strictly increasing,
/// with multiplicities for coincident quantiles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroSequence {
    zeros: Vec<f64>,
    multiplicity: Vec<u32>,
}

impl ZeroSequence {
    /// Builds from a nondecreasing list, collapsing repeats into multiplicities.
    pub fn from_sorted(values: &[f64]) -> Result<Self> {
        let mut zeros: Vec<f64> = Vec::with_capacity(values.len());
        let mut multiplicity: Vec<u32> = Vec::with_capacity(values.len());
        for &x in values {
            if !(x > 0.0 && x.is_finite()) {
                return Err(domain(format!("zeros must be positive and finite, got {x}")));
            }
            match zeros.last() {
                Some(&last) if x == last => *multiplicity.last_mut().unwrap() += 1,
                Some(&last) if x < last => return Err(domain("zeros must be sorted")),
                _ => {
                    zeros.push(x);
                    multiplicity.push(1);
                }
            }
        }
        Ok(Self { zeros, multiplicity })
    }

    /// Distinct zeros.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn multiplicity(&self) -> &[u32] {
        &self.multiplicity
    }

    /// Number of zeros counted with multiplicity.
    pub fn count(&self) -> usize {
        self.multiplicity.iter().map(|&m| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// `#{n : x_n <= r}` with multiplicity.
    pub fn counting(&self, r: f64) -> usize {
        let k = self.zeros.partition_point(|&x| x <= r);
        self.multiplicity[..k].iter().map(|&m| m as usize).sum()
    }

    /// Zeros one by one (multiplicity expanded), in increasing order.
    pub fn iter_expanded(&self) -> impl Iterator<Item = f64> + '_ {
        self.zeros
            .iter()
            .zip(&self.multiplicity)
            .flat_map(|(&x, &m)| std::iter::repeat(x).take(m as usize))
    }

    /// Rows `n x_n multiplicity`, `n` counting distinct zeros from 1.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, (x, m)) in self.zeros.iter().zip(&self.multiplicity).enumerate() {
            let _ = writeln!(s, "{} {x:?} {m}", i + 1);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut zeros = Vec::new();
        let mut multiplicity = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |m: &str| Error::Parse { line: no + 1, message: m.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(perr("expected `n x_n multiplicity`"));
            }
            let x: f64 = toks[1].parse().map_err(|_| perr("bad zero"))?;
            let m: u32 = toks[2].parse().map_err(|_| perr("bad multiplicity"))?;
            if !(x > 0.0 && x.is_finite()) || m == 0 {
                return Err(perr("zeros must be positive with multiplicity >= 1"));
            }
            if zeros.last().is_some_and(|&last| x <= last) {
                return Err(perr("zeros must be strictly increasing"));
            }
            zeros.push(x);
            multiplicity.push(m);
        }
        Ok(Self { zeros, multiplicity })
    }
}

/// `x_n = inf{t : μ(t) >= n}` for `n = 1 ..= floor(total)`, given the
/// generalized inverse of a cumulative distribution.
pub fn zeros_from_quantile(total: f64, quantile: impl Fn(f64) -> f64) -> ZeroSequence {
    let count = total.floor().max(0.0) as usize;
    let mut xs: Vec<f64> = (1..=count).map(|n| quantile(n as f64)).collect();
    // Guard against rounding in the inversion; the exact quantiles are monotone.
    for i in 1..xs.len() {
        if xs[i] < xs[i - 1] {
            xs[i] = xs[i - 1];
        }
    }
    ZeroSequence::from_sorted(&xs).unwrap_or_default()
}

/// Zeros at the integer crossings of the cumulative measure.
pub fn discretize_measure(measure: &RieszMeasure) -> ZeroSequence {
    let total = measure.total_mass();
    if total < 1.0 {
        log::warn!("total Riesz mass {total:.3} < 1: no zeros");
    }
    zeros_from_quantile(total, |level| measure.quantile(level).unwrap_or(f64::NAN))
}

pub fn discretize(h: &HarmonicApprox) -> ZeroSequence {
    discretize_measure(h.measure())
}

/// `f(z) = e^{log_c} ∏_{n > skip} (1 + z/x_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntireProduct {
    zeros: ZeroSequence,
    log_c: f64,
    skip: usize,
}

impl EntireProduct {
    pub fn new(zeros: ZeroSequence, log_c: f64) -> Self {
        Self { zeros, log_c, skip: 0 }
    }

    /// The product built from `h`: zeros from its measure, `C = e^{u(0)}`.
    pub fn from_approx(h: &HarmonicApprox) -> Self {
        Self::new(discretize(h), h.u0())
    }

    pub fn zeros(&self) -> &ZeroSequence {
        &self.zeros
    }

    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    pub fn skip(&self) -> usize {
        self.skip
    }

    /// Zeros actually in the product (after skipping), with multiplicity.
    fn active(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        let mut left = self.skip;
        self.zeros.zeros.iter().zip(&self.zeros.multiplicity).filter_map(move |(&x, &m)| {
            let drop = left.min(m as usize);
            left -= drop;
            let keep = m - drop as u32;
            (keep > 0).then_some((x, keep))
        })
    }

    /// `log|f(z)|`, or `-∞` exactly at a zero.
    pub fn log_abs_f(&self, z: Complex64) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.log_c);
        for (x, m) in self.active() {
            let w = z / x;
            if w.re == -1.0 && w.im == 0.0 {
                return f64::NEG_INFINITY;
            }
            acc.add(m as f64 * log_abs_1p(w));
        }
        acc.value()
    }

    /// `log m(r) = log|f(-r)|`: every factor is smallest on the negative axis.
    pub fn min_modulus(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(domain(format!("min_modulus needs r > 0, got {r}")));
        }
        Ok(self.log_abs_f(Complex64::new(-r, 0.0)))
    }

    /// `log M(r) = log f(r)`.
    pub fn max_modulus(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(domain(format!("max_modulus needs r > 0, got {r}")));
        }
        Ok(self.log_abs_f(Complex64::new(r, 0.0)))
    }

    /// Drops `k` more leading factors and sets the constant to 1.
    pub fn shifted_variant(&self, k: usize) -> Result<Self> {
        let remaining = self.zeros.count() - self.skip;
        if k >= remaining {
            return Err(domain(format!("cannot skip {k} of {remaining} zeros")));
        }
        Ok(Self { zeros: self.zeros.clone(), log_c: 0.0, skip: self.skip + k })
    }

    /// Header lines `# log_c`, `# skip`, then the zero table.
    pub fn to_text(&self) -> String {
        format!("# log_c {:?}\n# skip {}\n{}", self.log_c, self.skip, self.zeros.to_text())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut log_c = None;
        let mut skip = 0;
        for (no, line) in text.lines().enumerate() {
            let Some(rest) = line.trim().strip_prefix('#') else { continue };
            let perr = || Error::Parse { line: no + 1, message: "bad header".into() };
            let mut it = rest.split_whitespace();
            match (it.next(), it.next()) {
                (Some("log_c"), Some(v)) => log_c = Some(v.parse().map_err(|_| perr())?),
                (Some("skip"), Some(v)) => skip = v.parse().map_err(|_| perr())?,
                _ => {}
            }
        }
        let log_c = log_c.ok_or(Error::Parse { line: 0, message: "missing `# log_c`".into() })?;
        let zeros = ZeroSequence::from_text(text)?;
        if skip > 0 && skip >= zeros.count() {
            return Err(Error::Parse { line: 0, message: "skip exceeds zero count".into() });
        }
        Ok(Self { zeros, log_c, skip })
    }
}

/// One grid point of the error field.
#[derive(Debug, Clone, Copy)]
pub struct ErrorSample {
    pub z: Complex64,
    pub u: f64,
    pub log_f: f64,
}

impl ErrorSample {
    pub fn diff(&self) -> f64 {
        self.log_f - self.u
    }
}

/// `log|f| - u` over a grid in `D_1`.
#[derive(Debug, Clone)]
pub struct ApproxErrorReport {
    pub samples: Vec<ErrorSample>,
    /// `sup (log|f| - u)/log|z|`.
    pub sup_ratio: f64,
    /// Smallest `C` with `|log|f| - u| <= 3 log|z| + C` on the grid.
    pub fitted_c: f64,
    /// Points where `log|f| > u + 4 log|z|`.
    pub upper_violations: Vec<Complex64>,
    /// Largest `|z|` among the violations (0 when there are none): beyond it
    /// the `4 log|z|` bound held everywhere on the grid.
    pub r_emp: f64,
}

impl ApproxErrorReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,u,logf,diff\n");
        for p in &self.samples {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", p.z.re, p.z.im, p.u, p.log_f, p.diff());
        }
        s
    }
}

/// Error field of an arbitrary `log|f|` against `h`.
pub fn approx_error_with<F>(h: &HarmonicApprox, grid: &[Complex64], r_min: f64, log_f: F) -> Result<ApproxErrorReport>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    if !(r_min > 1.0) {
        return Err(domain(format!("r_min must exceed 1, got {r_min}")));
    }
    for &z in grid {
        if !in_d1(h.set(), z) {
            return Err(domain(format!("grid point {z} is within distance 1 of E")));
        }
        if z.norm() < r_min || z.norm() > h.trust_radius() {
            return Err(domain(format!(
                "grid point {z} outside the annulus [{r_min}, {}]",
                h.trust_radius()
            )));
        }
    }
    let samples: Vec<ErrorSample> =
        grid.par_iter().map(|&z| ErrorSample { z, u: h.eval(z), log_f: log_f(z) }).collect();
    let mut sup_ratio = f64::NEG_INFINITY;
    let mut fitted_c = f64::NEG_INFINITY;
    let mut upper_violations = Vec::new();
    let mut r_emp: f64 = 0.0;
    for p in &samples {
        let lz = p.z.norm().ln();
        sup_ratio = sup_ratio.max(p.diff() / lz);
        fitted_c = fitted_c.max(p.diff().abs() - 3.0 * lz);
        if p.diff() > 4.0 * lz {
            upper_violations.push(p.z);
            r_emp = r_emp.max(p.z.norm());
        }
    }
    Ok(ApproxErrorReport { samples, sup_ratio, fitted_c, upper_violations, r_emp })
}

pub fn approx_error(fp: &EntireProduct, h: &HarmonicApprox, grid: &[Complex64], r_min: f64) -> Result<ApproxErrorReport> {
    approx_error_with(h, grid, r_min, |z| fp.log_abs_f(z))
}

/// Radii where `log m(r) > 0`, resolved between samples by bisection.
#[derive(Debug, Clone)]
pub struct PositivitySet {
    pub set: IntervalSet,
    pub samples: Vec<(f64, bool)>,
    pub density: DensityEstimate,
}

/// `{r : log|f(-r)| > 0}` over the sample range. Sign changes between
/// consecutive samples are located by bisection to `1e-6` relative.
pub fn positivity_set(fp: &EntireProduct, r_samples: &[f64]) -> Result<PositivitySet> {
    if r_samples.len() < 2 || !(r_samples[0] > 1.0) || r_samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("positivity samples must be increasing, > 1, and at least two"));
    }
    let positive = |r: f64| fp.log_abs_f(Complex64::new(-r, 0.0)) > 0.0;
    let signs: Vec<bool> = r_samples.par_iter().map(|&r| positive(r)).collect();
    let crossing = |mut lo: f64, mut hi: f64| {
        let lo_sign = positive(lo);
        while hi - lo > 1e-6 * lo {
            let mid = (lo * hi).sqrt();
            if positive(mid) == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    };
    let mut ivs = Vec::new();
    let mut start = signs[0].then_some(r_samples[0]);
    for k in 1..r_samples.len() {
        match (signs[k - 1], signs[k]) {
            (false, true) => start = Some(crossing(r_samples[k - 1], r_samples[k])),
            (true, false) => {
                let end = crossing(r_samples[k - 1], r_samples[k]);
                ivs.push(Interval { lo: start.take().unwrap(), hi: end });
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        ivs.push(Interval { lo, hi: *r_samples.last().unwrap() });
    }
    let set = IntervalSet::new(ivs, false);
    let window = (r_samples[0], *r_samples.last().unwrap());
    let density = log_densities(&set, window, r_samples.len())?;
    let samples = r_samples.iter().copied().zip(signs).collect();
    Ok(PositivitySet { set, samples, density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn product(zeros: &[f64], log_c: f64) -> EntireProduct {
        EntireProduct::new(ZeroSequence::from_sorted(zeros).unwrap(), log_c)
    }

    #[test]
    fn quantiles_of_closed_form_cumulative() {
        // μ(t) = √t on [1, 100]: x_n = n².
        let z = zeros_from_quantile(10.0, |l| l * l);
        assert_eq!(&z.zeros()[..3], &[1.0, 4.0, 9.0]);
        assert_eq!(z.count(), 10);
        assert_eq!(z.counting(9.5), 3);
    }

    #[test]
    fn coincident_quantiles_become_multiplicity() {
        let z = ZeroSequence::from_sorted(&[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(z.zeros(), &[1.0, 2.0, 3.0]);
        assert_eq!(z.multiplicity(), &[1, 2, 1]);
        assert_eq!(z.count(), 4);
        let back = ZeroSequence::from_text(&z.to_text()).unwrap();
        assert_eq!(back, z);
        assert!(ZeroSequence::from_sorted(&[2.0, 1.0]).is_err());
    }

    #[test]
    fn log_modulus_examples() {
        let f = product(&[1.0], 0.0);
        assert_relative_eq!(f.log_abs_f(Complex64::new(1.0, 0.0)), 2f64.ln());
        assert_eq!(f.log_abs_f(Complex64::new(-1.0, 0.0)), f64::NEG_INFINITY);
        let f = product(&[1.0, 100.0], 0.0);
        assert_relative_eq!(f.log_abs_f(Complex64::new(-10.0, 0.0)), 8.1f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(f.min_modulus(10.0).unwrap(), 2.09186, epsilon = 1e-5);
        assert_relative_eq!(f.max_modulus(10.0).unwrap(), 2.49321, epsilon = 1e-5);
        assert_relative_eq!(f.max_modulus(1e-12).unwrap(), 0.0, epsilon = 1e-10);
        assert!(f.min_modulus(0.0).is_err());
    }

    #[test]
    fn circle_extrema_are_on_the_axis() {
        let f = product(&[0.7, 3.0, 3.5, 40.0, 41.0], 0.3);
        for r in [0.5, 2.0, 3.2, 20.0, 100.0] {
            let lo = f.min_modulus(r).unwrap();
            let hi = f.max_modulus(r).unwrap();
            for k in 0..512 {
                let v = f.log_abs_f(Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / 512.0));
                assert!(v <= hi + 1e-12 && v >= lo - 1e-12);
            }
        }
    }

    #[test]
    fn shifted_variant_examples() {
        let f = product(&[1.0, 2.0, 4.0], 0.0);
        assert_eq!(f.shifted_variant(0).unwrap(), f);
        let g = f.shifted_variant(1).unwrap();
        assert_relative_eq!(g.log_abs_f(Complex64::new(1.0, 0.0)), (1.5f64 * 1.25).ln(), epsilon = 1e-14);
        assert!(f.shifted_variant(3).is_err());
        let back = EntireProduct::from_text(&g.to_text()).unwrap();
        assert_eq!(back, g);
        // Multiplicity is consumed one factor at a time.
        let f = product(&[1.0, 1.0, 4.0], 0.0).shifted_variant(1).unwrap();
        assert_relative_eq!(f.log_abs_f(Complex64::new(1.0, 0.0)), (2.0f64 * 1.25).ln(), epsilon = 1e-14);
    }

    #[test]
    fn positivity_examples() {
        let f = product(&[1.0, 100.0], 0.0);
        assert!(f.min_modulus(10.0).unwrap() > 0.0);
        let f = product(&[1.0, 1.5], 0.0);
        assert_relative_eq!(f.min_modulus(1.2).unwrap(), 0.04f64.ln(), epsilon = 1e-12);
        // (r - 1)(r/1.5 - 1) = 1 reduces to r(r - 2.5) = 0.
        let p = positivity_set(&f, &crate::numeric::log_space(1.1, 100.0, 200)).unwrap();
        assert_eq!(p.set.len(), 1);
        assert_relative_eq!(p.set.intervals()[0].lo, 2.5, epsilon = 1e-5);
    }

    #[test]
    fn segment_zeros_stay_on_the_slit() {
        let set = IntervalSet::new(vec![Interval::new(1.0, 1e4).unwrap()], false);
        let h = crate::potential::solve(&set, &Default::default()).unwrap();
        let fp = EntireProduct::from_approx(&h);
        assert!(fp.zeros().count() > 10);
        assert!(fp.zeros().iter_expanded().all(|x| (1.0..=1e4).contains(&x)));
        for r in [1.0, 10.0, 500.0, 9999.0] {
            let diff = fp.zeros().counting(r) as f64 - h.mu_cumulative(r);
            assert!(diff.abs() < 1.0, "r={r}: {diff}");
        }
        assert_eq!(fp.zeros().count(), h.measure().total_mass().floor() as usize);
    }
}
