//! Upper bounds for the hyperbolic distance `ρ_D(1, r)` along the positive
//! axis, and the Harnack check they imply for computed representatives.
//!
//! The density of the hyperbolic metric of `D = C \ E` at `t > 0` is bounded
//! by the cut-plane value `1/(2t)` and by the Beardon–Pommerenke estimate
//! `(π/2)/(t·β_D(t))`, where `β_D(t)` is the logarithmic distance from `t` to
//! the nearest point of `E*`. Integrating a bound over `[1, r]` bounds
//! `ρ_D(1, r)` from above.
//!
//! Both estimates assume the boundary point nearest to a positive `t` is the
//! origin; the slit `[-1, 0]` is added internally to guarantee it. Adding
//! slits shrinks `D`, which only enlarges its metric, so the bounds stay valid
//! for the caller's set.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::intervals::{Interval, IntervalSet};
use crate::numeric::integrate_with_breaks;
use crate::potential::HarmonicApprox;

const QUAD_TOL: f64 = 1e-6;

/// Which density estimate is in force at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveBound {
    CutPlane,
    BeardonPommerenke,
}

/// The set with `[0, 1]` adjoined and its doubled window `E′`, prepared once
/// for repeated evaluation.
#[derive(Debug, Clone)]
pub struct BoundGeometry {
    set: IntervalSet,
    e_prime: IntervalSet,
}

impl BoundGeometry {
    pub fn new(set: &IntervalSet) -> Self {
        let mut ivs = set.intervals().to_vec();
        ivs.push(Interval { lo: 0.0, hi: 1.0 });
        let set = IntervalSet::new(ivs, true);
        let e_prime = e_prime(&set);
        Self { set, e_prime }
    }

    /// The normalized set actually used: `E*` with `[0, 1]` adjoined.
    pub fn set(&self) -> &IntervalSet {
        &self.set
    }

    pub fn e_prime(&self) -> &IntervalSet {
        &self.e_prime
    }

    /// `β_D(t) = inf |log(t/|b|)|` over boundary points `b`; zero on `E*`.
    pub fn beta(&self, t: f64) -> f64 {
        let ivs = self.set.intervals();
        let idx = ivs.partition_point(|iv| iv.hi < t);
        if ivs.get(idx).is_some_and(|iv| iv.lo <= t) {
            return 0.0;
        }
        // ivs[0] = [0, b_0] with b_0 >= 1, so a left neighbour exists for t > 0.
        let left = (t / ivs[idx - 1].hi).ln();
        let right = ivs.get(idx).map_or(f64::INFINITY, |iv| (iv.lo / t).ln());
        left.min(right)
    }

    /// `min(1/(2t), (π/2)/(t β_D(t)))` and which term attains it.
    pub fn density_upper(&self, t: f64) -> (f64, ActiveBound) {
        let cut = 0.5 / t;
        let beta = self.beta(t);
        if beta > 0.0 {
            let bp = 0.5 * PI / (t * beta);
            if bp < cut {
                return (bp, ActiveBound::BeardonPommerenke);
            }
        }
        (cut, ActiveBound::CutPlane)
    }

    /// The density bound multiplied by `t`, i.e. the integrand in `log t`.
    fn scaled_density(&self, t: f64, windowed: bool) -> (f64, ActiveBound) {
        if windowed {
            if self.e_prime.contains(t) {
                (0.5, ActiveBound::CutPlane)
            } else {
                (0.5 * PI / self.beta(t), ActiveBound::BeardonPommerenke)
            }
        } else {
            let (d, which) = self.density_upper(t);
            (d * t, which)
        }
    }

    /// Breakpoints in `log t` inside `(0, log r)`: interval endpoints, the `E′`
    /// window, the geometric gap midpoints `s_n`, and the points where
    /// `β_D = π` (the switch between the two bounds in min mode).
    fn log_breaks(&self, log_r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let ivs = self.set.intervals();
        for iv in ivs.iter().chain(self.e_prime.intervals()) {
            for e in [iv.lo, iv.hi] {
                if e > 0.0 {
                    out.push(e.ln());
                }
            }
        }
        for w in ivs.windows(2) {
            let (c, d) = (w[0].hi.ln(), w[1].lo.ln());
            out.extend([0.5 * (c + d), c + PI, d - PI]);
        }
        if let Some(last) = ivs.last() {
            out.push(last.hi.ln() + PI);
        }
        out.retain(|&u| u > 0.0 && u < log_r);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `∫_{r1}^{r2}` of the density bound, `1 <= r1 <= r2`.
    pub fn integral(&self, r1: f64, r2: f64, windowed: bool) -> f64 {
        if r2 <= r1 {
            return 0.0;
        }
        let f = |u: f64| self.scaled_density(u.exp(), windowed).0;
        integrate_with_breaks(&f, r1.ln(), r2.ln(), &self.log_breaks(r2.ln()), QUAD_TOL)
    }

    /// `ρ_D(1, r)` bound.
    pub fn rho_upper(&self, r: f64, windowed: bool) -> Result<f64> {
        if !(r > 1.0) {
            return Err(domain(format!("rho_upper needs r > 1, got {r}")));
        }
        Ok(self.integral(1.0, r, windowed))
    }

    /// The split of the windowed bound: the `E′` part
    /// `½ ∫_{E′∩(1,r)} dt/t` and the remainder `(π/2) ∫ dt/(t β_D)`.
    pub fn rho_upper_split(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 1.0) {
            return Err(domain(format!("rho_upper needs r > 1, got {r}")));
        }
        let log_r = r.ln();
        let on = 0.5 * crate::intervals::log_integral(&self.e_prime, r)?;
        let off = |u: f64| {
            let t = u.exp();
            if self.e_prime.contains(t) {
                0.0
            } else {
                0.5 * PI / self.beta(t)
            }
        };
        Ok((on, integrate_with_breaks(&off, 0.0, log_r, &self.log_breaks(log_r), QUAD_TOL)))
    }

    /// Fraction of `(1, r)`, in logarithmic measure, where the
    /// Beardon–Pommerenke term is the one in force.
    pub fn bp_fraction(&self, r: f64, windowed: bool) -> f64 {
        let log_r = r.ln();
        if log_r <= 0.0 {
            return 0.0;
        }
        let mut pts = self.log_breaks(log_r);
        pts.insert(0, 0.0);
        pts.push(log_r);
        let covered: f64 = pts
            .windows(2)
            .filter(|w| {
                let mid = (0.5 * (w[0] + w[1])).exp();
                self.scaled_density(mid, windowed).1 == ActiveBound::BeardonPommerenke
            })
            .map(|w| w[1] - w[0])
            .sum();
        covered / log_r
    }

    /// Bound values at increasing radii, integrated piece by piece.
    pub fn profile(&self, radii: &[f64], windowed: bool) -> Result<BoundProfile> {
        let mut rho_upper = Vec::with_capacity(radii.len());
        let mut active = Vec::with_capacity(radii.len());
        let mut prev = 1.0;
        let mut acc = 0.0;
        for &r in radii {
            if !(r > 1.0) || r < prev {
                return Err(domain("profile radii must be increasing and > 1"));
            }
            acc += self.integral(prev, r, windowed);
            prev = r;
            rho_upper.push(acc);
            active.push(self.bp_fraction(r, windowed));
        }
        Ok(BoundProfile { radii: radii.to_vec(), rho_upper, bp_fraction: active, windowed })
    }
}

/// Sampled `ρ_D(1, r)` bounds.
#[derive(Debug, Clone)]
pub struct BoundProfile {
    pub radii: Vec<f64>,
    pub rho_upper: Vec<f64>,
    /// Log-measure fraction of `(1, r)` on which the Beardon–Pommerenke term
    /// was used rather than the cut-plane term.
    pub bp_fraction: Vec<f64>,
    pub windowed: bool,
}

impl BoundProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,rho_upper,active_bound_fraction\n");
        for ((r, v), f) in self.radii.iter().zip(&self.rho_upper).zip(&self.bp_fraction) {
            let _ = writeln!(s, "{r:e},{v:e},{f:e}");
        }
        s
    }
}

/// `β_D(t)` for the set with `[0, 1]` adjoined.
pub fn beta_d(set: &IntervalSet, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("beta_D needs t > 0, got {t}")));
    }
    Ok(BoundGeometry::new(set).beta(t))
}

/// Pointwise hyperbolic density bound `min(1/(2t), (π/2)/(t β_D(t)))`.
pub fn density_upper(set: &IntervalSet, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("density bound needs t > 0, got {t}")));
    }
    Ok(BoundGeometry::new(set).density_upper(t).0)
}

/// `E′ = ⋃ [a_n/2, 2b_n]`, merged.
pub fn e_prime(set: &IntervalSet) -> IntervalSet {
    let ivs = set.intervals().iter().map(|iv| Interval { lo: 0.5 * iv.lo, hi: 2.0 * iv.hi }).collect();
    IntervalSet::new(ivs, set.includes_origin())
}

/// Upper bound for `ρ_D(1, r)`. With `windowed` the integrand is
/// `1/(2t)` on `E′` and `(π/2)/(tβ_D)` off it; otherwise the pointwise min.
pub fn rho_upper(set: &IntervalSet, r: f64, windowed: bool) -> Result<f64> {
    BoundGeometry::new(set).rho_upper(r, windowed)
}

/// One Harnack comparison `log(u(r)/u(1)) <= ρ_D(1, r)`.
#[derive(Debug, Clone, Copy)]
pub struct HarnackSample {
    pub r: f64,
    pub growth: f64,
    pub bound: f64,
}

impl HarnackSample {
    pub fn margin(&self) -> f64 {
        self.bound - self.growth
    }
}

#[derive(Debug, Clone)]
pub struct HarnackReport {
    pub samples: Vec<HarnackSample>,
    pub tolerance: f64,
}

impl HarnackReport {
    pub fn violations(&self) -> usize {
        self.samples.iter().filter(|s| s.margin() < -self.tolerance).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn min_margin(&self) -> f64 {
        self.samples.iter().map(|s| s.margin()).fold(f64::INFINITY, f64::min)
    }
}

/// Compares the growth of `u` along `[1, r]` with the min-based bound.
pub fn harnack_check(h: &HarmonicApprox, r_samples: &[f64]) -> Result<HarnackReport> {
    let geo = BoundGeometry::new(h.set());
    let u1 = h.eval(Complex64::new(1.0, 0.0));
    let mut radii = r_samples.to_vec();
    radii.sort_by(f64::total_cmp);
    for &r in &radii {
        if !(r > 1.0 && r <= h.trust_radius()) {
            return Err(domain(format!(
                "Harnack sample r = {r} outside (1, {}]",
                h.trust_radius()
            )));
        }
    }
    let bounds = geo.profile(&radii, false)?;
    let samples = radii
        .iter()
        .zip(&bounds.rho_upper)
        .map(|(&r, &bound)| HarnackSample {
            r,
            growth: (h.eval(Complex64::new(r, 0.0)) / u1).ln(),
            bound,
        })
        .collect();
    Ok(HarnackReport { samples, tolerance: 1e-6 })
}
