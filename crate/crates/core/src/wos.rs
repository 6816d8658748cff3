//! Walk-on-spheres estimates of the harmonic measure of the outer boundary
//! of a square with real slits removed, and the maximum-principle comparison
//! with computed representatives.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::growth::CheckRecord;
use crate::intervals::{IntervalSet, Interval};
use crate::potential::HarmonicApprox;

/// Walks beyond this many steps are counted as absorbed; in practice they
/// are absorbed long before.
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct WosConfig {
    pub center: Complex64,
    pub half_side: f64,
    /// Slits `[-hi, -lo]` given through the mirror set.
    pub slits: IntervalSet,
    pub epsilon: f64,
    pub n_walks: usize,
    pub seed: u64,
    /// Run walks on one thread (results are identical either way; this only
    /// pins the evaluation order).
    pub serial: bool,
}

impl WosConfig {
    /// The square `{-2r < Re z < -r, |Im z| < r/2}` centred at `z_r = -3r/2`,
    /// with the part of `set` inside it as slits.
    pub fn example_square(set: &IntervalSet, r: f64, n_walks: usize, seed: u64) -> Self {
        let half_side = 0.5 * r;
        Self {
            center: Complex64::new(-1.5 * r, 0.0),
            half_side,
            slits: set.restrict(r, 2.0 * r),
            epsilon: 1e-6 * half_side,
            n_walks,
            seed,
            serial: false,
        }
    }

    /// Starting point near `z_r` off the slits: the midpoint of the gap
    /// containing the centre, or of the next gap outward when the centre lies
    /// on a slit (for the example set and even `r`, `-3r/2` is a slit endpoint).
    pub fn gap_start(&self) -> Complex64 {
        let x = -self.center.re;
        let ivs = self.slits.intervals();
        let k = ivs.partition_point(|iv| iv.hi < x);
        let (c, d) = match ivs.get(k) {
            Some(iv) if iv.lo <= x => (iv.hi, ivs.get(k + 1).map_or(iv.hi + self.half_side, |nx| nx.lo)),
            Some(iv) => (if k > 0 { ivs[k - 1].hi } else { x - self.half_side }, iv.lo),
            None => (ivs.last().map_or(x, |iv| iv.hi.max(x - self.half_side)), x + self.half_side),
        };
        Complex64::new(-0.5 * (c + d), 0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.half_side > 0.0) {
            return Err(domain("half_side must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.half_side / 100.0) {
            return Err(domain("epsilon must lie in (0, half_side/100)"));
        }
        if self.n_walks < 1000 {
            return Err(domain("at least 1000 walks are required"));
        }
        Ok(())
    }

    /// Distance to the square's boundary (negative outside).
    fn dist_boundary(&self, z: Complex64) -> f64 {
        let d = z - self.center;
        self.half_side - d.re.abs().max(d.im.abs())
    }

    /// Exact distance to the nearest slit.
    fn dist_slits(&self, z: Complex64) -> f64 {
        let ivs = self.slits.intervals();
        let x = -z.re;
        let y = z.im.abs();
        let idx = ivs.partition_point(|iv| iv.hi < x);
        let mut best = f64::INFINITY;
        for iv in &ivs[idx.saturating_sub(1)..(idx + 1).min(ivs.len())] {
            let dx = if x < iv.lo { iv.lo - x } else if x > iv.hi { x - iv.hi } else { 0.0 };
            best = best.min(dx.hypot(y));
        }
        if self.slits.includes_origin() {
            best = best.min(z.norm());
        }
        best
    }

    /// One walk from `start`: true when it reaches the square's boundary.
    fn walk(&self, start: Complex64, rng: &mut ChaCha8Rng) -> bool {
        let mut z = start;
        for _ in 0..MAX_STEPS {
            let db = self.dist_boundary(z);
            let ds = self.dist_slits(z);
            if ds < self.epsilon {
                return false;
            }
            if db < self.epsilon {
                return true;
            }
            let theta = rng.random::<f64>() * 2.0 * PI;
            z += Complex64::from_polar(db.min(ds), theta);
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WosEstimate {
    pub omega_hat: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95: f64,
    pub walks_used: usize,
}

/// Fraction of walks from `start` that exit through the square's boundary
/// before coming within `epsilon` of a slit. Walk `i` draws from its own
/// stream `(seed, i)`, so the estimate does not depend on scheduling.
pub fn wos_measure(cfg: &WosConfig, start: Complex64) -> Result<WosEstimate> {
    cfg.validate()?;
    if cfg.dist_boundary(start) <= 0.0 {
        return Err(domain(format!("start {start} is outside the square")));
    }
    if cfg.dist_slits(start) < cfg.epsilon {
        return Ok(WosEstimate { omega_hat: 0.0, ci95: 0.0, walks_used: 0 });
    }
    let one = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        usize::from(cfg.walk(start, &mut rng))
    };
    let hits: usize = if cfg.serial {
        (0..cfg.n_walks).map(one).sum()
    } else {
        (0..cfg.n_walks).into_par_iter().map(one).sum()
    };
    let n = cfg.n_walks as f64;
    let p = hits as f64 / n;
    Ok(WosEstimate { omega_hat: p, ci95: 1.96 * (p * (1.0 - p) / n).sqrt(), walks_used: cfg.n_walks })
}

/// One radius of the decay comparison.
#[derive(Debug, Clone, Copy)]
pub struct DecaySample {
    pub r: f64,
    pub start: Complex64,
    pub estimate: WosEstimate,
    pub u_center: f64,
    /// `u` at the point of `∂Q` farthest from the origin, an upper bound
    /// for `u` on `∂Q` since `u` is radially increasing with circle maximum
    /// on the positive axis.
    pub boundary_max: f64,
}

impl DecaySample {
    pub fn bound(&self) -> f64 {
        self.boundary_max * (self.estimate.omega_hat + 2.0 * self.estimate.ci95)
    }

    pub fn margin(&self) -> f64 {
        self.bound() - self.u_center
    }
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub samples: Vec<DecaySample>,
}

impl DecayReport {
    pub fn record(&self) -> CheckRecord {
        let m = self.samples.iter().map(|s| s.margin()).fold(f64::INFINITY, f64::min);
        CheckRecord::new("example_decay", m >= 0.0, m, format!("{} radii", self.samples.len()))
    }

    /// `ω̂ r / log(16 r)` at each radius.
    pub fn scaled(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.estimate.omega_hat * s.r / (16.0 * s.r).ln()).collect()
    }

    /// Columns `r, omega_hat, ci95, n_walks, seed`.
    pub fn to_csv(&self, seed: u64) -> String {
        let mut s = String::from("r,omega_hat,ci95,n_walks,seed\n");
        for d in &self.samples {
            let _ = writeln!(s, "{:e},{:e},{:e},{},{seed}", d.r, d.estimate.omega_hat, d.estimate.ci95, d.estimate.walks_used);
        }
        s
    }
}

/// Maximum principle in `Q \ E`: `u(z_r) <= max_{∂Q} u · ω(z_r)`, with the
/// estimate inflated by two CI half-widths. The slits are those of `h`'s own
/// set, so the comparison is exact for the truncated `h`; each square must lie
/// within the truncation (`2r <= largest endpoint`).
pub fn verify_example_decay(h: &HarmonicApprox, r_list: &[f64], n_walks: usize, seed: u64, serial: bool) -> Result<DecayReport> {
    let mut samples = Vec::with_capacity(r_list.len());
    for &r in r_list {
        if 2.0 * r > h.set().max_endpoint() {
            return Err(domain(format!("square for r = {r} extends beyond the truncated set")));
        }
        let cfg = WosConfig { serial, ..WosConfig::example_square(h.set(), r, n_walks, seed) };
        let start = cfg.gap_start();
        let estimate = wos_measure(&cfg, start)?;
        let far = Complex64::new(-2.0 * r, 0.5 * r).norm();
        samples.push(DecaySample {
            r,
            estimate,
            start,
            u_center: h.eval(start),
            boundary_max: h.eval(Complex64::new(far, 0.0)),
        });
    }
    Ok(DecayReport { samples })
}

/// The interval-length condition behind the capacity hypothesis: every
/// window `[x - h, x + h]` with `|x - z_r| < r/2 - h` contains a whole slit
/// of length at least `1/(2r)`, whence `cap ≥ ¼·½·1/(2r) = 1/(16r)` after
/// scaling by `1/(2h)`. Checked exactly at the worst window positions.
pub fn capacity_condition(set: &IntervalSet, r: f64, h: f64) -> bool {
    let (lo, hi) = (r + h, 2.0 * r - h);
    let long: Vec<Interval> =
        set.intervals().iter().copied().filter(|iv| iv.len() >= 1.0 / (2.0 * r)).collect();
    // Mirror windows [w, w + 2h] with centre in (lo, hi); the first slit
    // starting at or after w must end by w + 2h. The worst starts are the
    // left end and the points just past each slit's left end.
    let fits = |w: f64, strict: bool| {
        let k = long.partition_point(|iv| if strict { iv.lo <= w } else { iv.lo < w });
        long.get(k).is_some_and(|iv| iv.hi <= w + 2.0 * h)
    };
    let starts = std::iter::once((lo - h, false))
        .chain(long.iter().map(|iv| (iv.lo, true)).filter(|&(w, _)| w > lo - h && w < hi - h));
    starts.into_iter().all(|(w, strict)| fits(w, strict))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(slits: IntervalSet, n: usize) -> WosConfig {
        WosConfig {
            center: Complex64::new(0.0, 0.0),
            half_side: 1.0,
            slits,
            epsilon: 1e-6,
            n_walks: n,
            seed: 7,
            serial: true,
        }
    }

    #[test]
    fn no_slits_always_exit() {
        let e = wos_measure(&cfg(IntervalSet::empty(), 2000), Complex64::new(0.1, 0.2)).unwrap();
        assert_eq!(e.omega_hat, 1.0);
        assert_eq!(e.ci95, 0.0);
    }

    #[test]
    fn start_on_slit_and_outside() {
        let slit = IntervalSet::new(vec![Interval::new(0.0, 0.5).unwrap()], false);
        let c = cfg(slit, 1000);
        let e = wos_measure(&c, Complex64::new(-0.25, 0.0)).unwrap();
        assert_eq!(e.omega_hat, 0.0);
        assert!(wos_measure(&c, Complex64::new(3.0, 0.0)).is_err());
        let mut bad = c.clone();
        bad.n_walks = 10;
        assert!(wos_measure(&bad, Complex64::new(0.3, 0.3)).is_err());
    }

    #[test]
    fn seeded_runs_repeat() {
        let slit = IntervalSet::new(vec![Interval::new(0.2, 0.6).unwrap()], false);
        let mut c = cfg(slit, 3000);
        let a = wos_measure(&c, Complex64::new(-0.4, 0.3)).unwrap();
        c.serial = false;
        let b = wos_measure(&c, Complex64::new(-0.4, 0.3)).unwrap();
        assert_eq!(a, b);
        assert!(a.omega_hat > 0.0 && a.omega_hat < 1.0);
    }

    #[test]
    fn capacity_condition_on_example_set() {
        let set = crate::intervals::build_example_sodin(500).unwrap();
        for r in [25.0, 50.0, 100.0, 200.0] {
            assert!(capacity_condition(&set, r, 1.0), "r = {r}");
        }
        // Sparse slits fail it.
        let sparse = IntervalSet::new(vec![Interval::new(30.0, 31.0).unwrap()], false);
        assert!(!capacity_condition(&sparse, 25.0, 1.0));
    }
}
