//! Piecewise representation of a Riesz measure supported on `E*`.
//!
//! Two kinds of pieces cover the intervals:
//!
//! * **Chebyshev pieces** span a whole interval whose endpoints see no smaller
//!   length scale than the interval itself. The density is `ψ(x)/√(1−x²)` with
//!   `ψ` a Chebyshev series, and its logarithmic potential is known in closed
//!   form through the Joukowski map.
//! * **Panels** tile intervals that need local refinement (very long intervals,
//!   or nearly touching neighbours). Panels are graded geometrically towards
//!   each endpoint; the two end panels use the substitution `t − a ∝ (1+s)²`,
//!   which absorbs the inverse-square-root endpoint behaviour, so on every
//!   panel the density is smooth in the panel variable `s ∈ [−1, 1]` and is
//!   sampled at Gauss–Legendre points. Near-field potentials use exact
//!   product integration against the Legendre interpolant.
//!
//! In both cases the unknowns are point masses `m_j` at quadrature nodes, so
//! `(t_j, m_j)` is always a valid quadrature rule for the measure.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::intervals::IntervalSet;
use crate::legendre::{bernstein_rho, legendre_integrals, legendre_values, log_moments, GaussLegendre};
use crate::numeric::CompensatedSum;

/// Panels whose targets sit inside this Bernstein ellipse use product
/// integration; outside it the Gauss rule is already at rounding level.
const NEAR_RHO: f64 = 3.0;

/// Geometric growth factor of panel lengths away from a refined endpoint.
const GRADING: f64 = 2.0;
/// `-log` of the target accuracy of Chebyshev pieces (about `1e-11`).
const CHEBYSHEV_DIGITS: f64 = 25.3;

pub(crate) fn upper(z: Complex64) -> Complex64 {
    Complex64::new(z.re, z.im.abs())
}

/// `log|1 + w|` without cancellation for small `w`.
pub(crate) fn log_abs_1p(w: Complex64) -> f64 {
    if w.norm() < 0.5 {
        0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p()
    } else {
        (w + 1.0).norm().ln()
    }
}

/// Joukowski geometry of one slit `[−b, −a]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlitMap {
    a: f64,
    b: f64,
    h: f64,
    /// `ζ` at `z = 0`; real and `< −1`.
    zeta0: f64,
}

impl SlitMap {
    pub fn new(a: f64, b: f64) -> Self {
        let (sa, sb) = (a.sqrt(), b.sqrt());
        Self { a, b, h: 0.5 * (b - a), zeta0: -(sb + sa) / (sb - sa) }
    }

    /// Fills `g[0] = log|ζ_z/ζ_0|` and `g[p] = Re(ζ_z^{−p} − ζ_0^{−p})/p`.
    ///
    /// `z` must lie in the closed upper half-plane with `Im z = +0.0` on the axis,
    /// which picks the branch of `√(w−1)√(w+1)` continuous with `z = 0`.
    pub fn moments(&self, z: Complex64, g: &mut [f64]) {
        let h = self.h;
        let vb = (z + self.b) / h;
        let va = (z + self.a) / h;
        let s_z = -(vb.sqrt() * va.sqrt());
        let s_0 = -(self.a * self.b).sqrt() / h;
        let sum = s_z + s_0;
        let ds = if sum.norm() >= 0.25 * s_z.norm().max(s_0.abs()) {
            z * (self.a + self.b + z) / (h * h) / sum
        } else {
            s_z - s_0
        };
        let dzeta = -z / h + ds;
        let zeta = dzeta + self.zeta0;
        let q = dzeta / self.zeta0;
        g[0] = if q.norm() < 0.5 {
            0.5 * (2.0 * q.re + q.norm_sqr()).ln_1p()
        } else {
            zeta.norm().ln() - self.zeta0.abs().ln()
        };
        // G_p = ζ_z^{−p} − ζ_0^{−p} = w G_{p−1} + (r − 1) ζ_0^{−p}, |w| ≤ 1.
        let w = zeta.inv();
        let r_minus_1 = -dzeta * w;
        let inv0 = self.zeta0.recip();
        let mut s = 1.0;
        let mut gp = Complex64::new(0.0, 0.0);
        for (p, slot) in g.iter_mut().enumerate().skip(1) {
            s *= inv0;
            gp = w * gp + r_minus_1 * s;
            *slot = gp.re / p as f64;
        }
    }

    fn to_x(&self, t: f64) -> f64 {
        ((t - self.a) - (self.b - t)) / (self.b - self.a)
    }

    fn to_t(&self, x: f64) -> f64 {
        (0.5 * (self.a + self.b) + self.h * x).clamp(self.a, self.b)
    }
}

/// Chebyshev angles `θ_j = π − (2j+1)π/(2n)`, so that `x_j = cos θ_j` ascends.
pub(crate) fn node_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| PI - (2 * j + 1) as f64 * PI / (2 * n) as f64).collect()
}

/// Map from the panel variable `s ∈ [−1, 1]` to `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PanelMap {
    /// `t = m + h s` on `[c, d]`.
    Affine { c: f64, d: f64 },
    /// `t = a + len (1+s)²/4`: the end panel at the left endpoint `a`.
    Left { a: f64, len: f64 },
    /// `t = b − len (1−s)²/4`: the end panel at the right endpoint `b`.
    Right { b: f64, len: f64 },
}

impl PanelMap {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            PanelMap::Affine { c, d } => (c, d),
            PanelMap::Left { a, len } => (a, a + len),
            PanelMap::Right { b, len } => (b - len, b),
        }
    }

    fn to_t(&self, s: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let t = match *self {
            PanelMap::Affine { c, d } => 0.5 * (c + d) + 0.5 * (d - c) * s,
            PanelMap::Left { a, len } => a + len * (1.0 + s) * (1.0 + s) / 4.0,
            PanelMap::Right { b, len } => b - len * (1.0 - s) * (1.0 - s) / 4.0,
        };
        t.clamp(lo, hi)
    }

    fn to_s(&self, t: f64) -> f64 {
        let s = match *self {
            PanelMap::Affine { c, d } => ((t - c) - (d - t)) / (d - c),
            PanelMap::Left { a, len } => 2.0 * ((t - a) / len).max(0.0).sqrt() - 1.0,
            PanelMap::Right { b, len } => 1.0 - 2.0 * ((b - t) / len).max(0.0).sqrt(),
        };
        s.clamp(-1.0, 1.0)
    }

    /// `log|y + T(s)| = c + Σ_i log|s − w_i|` for one or two targets `w_i`.
    fn targets(&self, y: Complex64) -> (f64, Complex64, Option<Complex64>) {
        match *self {
            PanelMap::Affine { c, d } => {
                let h = 0.5 * (d - c);
                (h.ln(), -(y + 0.5 * (c + d)) / h, None)
            }
            PanelMap::Left { a, len } => {
                let v = (-4.0 * (y + a) / len).sqrt();
                ((len / 4.0).ln(), v - 1.0, Some(-v - 1.0))
            }
            PanelMap::Right { b, len } => {
                let v = (4.0 * (y + b) / len).sqrt();
                ((len / 4.0).ln(), 1.0 - v, Some(1.0 + v))
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// `table[p][j] = cos(p θ_j)`.
    Chebyshev { map: SlitMap, table: Arc<Vec<Vec<f64>>> },
    Panel { map: PanelMap, rule: Arc<GaussLegendre> },
}

/// Layout of one piece, before weights are known.
#[derive(Debug, Clone)]
pub(crate) enum PieceLayout {
    Chebyshev { a: f64, b: f64, n: usize },
    Panel { map: PanelMap, order: usize },
}

/// Scratch buffers for potential evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    g: Vec<f64>,
    r: Vec<f64>,
}

impl Scratch {
    pub fn new(max_order: usize) -> Self {
        Self { g: vec![0.0; max_order], r: vec![0.0; max_order] }
    }
}

/// The measure restricted to one piece of `E*`.
#[derive(Debug, Clone)]
pub struct MeasurePiece {
    kind: Kind,
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Chebyshev coefficients of `ψ`, or Legendre coefficients of the panel density.
    coeffs: Vec<f64>,
    mass: f64,
}

impl PieceLayout {
    pub fn order(&self) -> usize {
        match *self {
            PieceLayout::Chebyshev { n, .. } => n,
            PieceLayout::Panel { order, .. } => order,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            PieceLayout::Chebyshev { a, b, .. } => (a, b),
            PieceLayout::Panel { map, .. } => map.bounds(),
        }
    }

    /// Bare piece (unit weights), used for node positions and basis rows.
    pub fn instantiate(&self, rules: &mut RuleCache) -> MeasurePiece {
        let n = self.order();
        MeasurePiece::from_weights(self, rules, vec![0.0; n])
    }
}

/// Quadrature tables shared between pieces of the same order.
#[derive(Debug, Default)]
pub(crate) struct RuleCache {
    gauss: Vec<Arc<GaussLegendre>>,
    cheb: Vec<Arc<Vec<Vec<f64>>>>,
}

impl RuleCache {
    fn gauss(&mut self, n: usize) -> Arc<GaussLegendre> {
        if let Some(r) = self.gauss.iter().find(|r| r.len() == n) {
            return r.clone();
        }
        let r = Arc::new(GaussLegendre::new(n));
        self.gauss.push(r.clone());
        r
    }

    fn cheb(&mut self, n: usize) -> Arc<Vec<Vec<f64>>> {
        if let Some(t) = self.cheb.iter().find(|t| t.len() == n) {
            return t.clone();
        }
        let thetas = node_angles(n);
        let t: Arc<Vec<Vec<f64>>> =
            Arc::new((0..n).map(|p| thetas.iter().map(|th| (p as f64 * th).cos()).collect()).collect());
        self.cheb.push(t.clone());
        t
    }
}

impl MeasurePiece {
    pub(crate) fn from_weights(layout: &PieceLayout, rules: &mut RuleCache, weights: Vec<f64>) -> Self {
        let n = weights.len();
        let (lo, hi) = layout.bounds();
        let mass = weights.iter().copied().collect::<CompensatedSum>().value();
        match *layout {
            PieceLayout::Chebyshev { a, b, .. } => {
                let map = SlitMap::new(a, b);
                let table = rules.cheb(n);
                let nodes = table[1].iter().map(|&x| map.to_t(x)).collect();
                let coeffs = (0..n)
                    .map(|p| {
                        let s: CompensatedSum = weights.iter().zip(&table[p]).map(|(m, c)| m * c).collect();
                        s.value() * if p == 0 { 1.0 / PI } else { 2.0 / PI }
                    })
                    .collect();
                Self { kind: Kind::Chebyshev { map, table }, lo, hi, nodes, weights, coeffs, mass }
            }
            PieceLayout::Panel { map, .. } => {
                let rule = rules.gauss(n);
                let nodes = rule.nodes.iter().map(|&s| map.to_t(s)).collect();
                let coeffs = (0..n)
                    .map(|k| {
                        let s: CompensatedSum =
                            weights.iter().zip(&rule.table[k]).map(|(m, p)| m * p).collect();
                        s.value() * (2 * k + 1) as f64 / 2.0
                    })
                    .collect();
                Self { kind: Kind::Panel { map, rule }, lo, hi, nodes, weights, coeffs, mass }
            }
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_panel(&self) -> bool {
        matches!(self.kind, Kind::Panel { .. })
    }

    /// Check points interlacing the nodes, endpoints included.
    pub fn check_points(&self) -> Vec<f64> {
        let n = self.nodes.len();
        match &self.kind {
            Kind::Chebyshev { map, .. } => {
                (0..=n).map(|i| map.to_t(-(i as f64 * PI / n as f64).cos())).collect()
            }
            Kind::Panel { map, rule } => {
                let mut pts = vec![map.to_t(-1.0)];
                for w in rule.nodes.windows(2) {
                    pts.push(map.to_t(0.5 * (w[0] + w[1])));
                }
                pts.push(map.to_t(1.0));
                pts
            }
        }
    }

    fn panel_is_near(map: &PanelMap, y: Complex64) -> bool {
        let (_, w1, w2) = map.targets(y);
        bernstein_rho(w1) < NEAR_RHO || w2.is_some_and(|w| bernstein_rho(w) < NEAR_RHO)
    }

    /// `∫ log|y + T(s)| P_k(s) ds` for all `k` (accumulated into `out`).
    fn panel_log_moments(map: &PanelMap, y: Complex64, r: &mut [f64], out: &mut [f64]) -> f64 {
        let (c, w1, w2) = map.targets(y);
        log_moments(w1, out);
        if let Some(w2) = w2 {
            log_moments(w2, r);
            for (o, v) in out.iter_mut().zip(r.iter()) {
                *o += v;
            }
        }
        c
    }

    /// `∫ log|1 + z/t| dμ` over this piece.
    pub(crate) fn potential(&self, z: Complex64, sc: &mut Scratch) -> f64 {
        let z = upper(z);
        let zero = Complex64::new(0.0, 0.0);
        match &self.kind {
            Kind::Chebyshev { map, .. } => {
                let g = &mut sc.g[..self.coeffs.len()];
                map.moments(z, g);
                let mut acc = CompensatedSum::new();
                acc.add(PI * self.coeffs[0] * g[0]);
                for p in 1..self.coeffs.len() {
                    acc.add(-PI * self.coeffs[p] * g[p]);
                }
                acc.value()
            }
            Kind::Panel { map, .. } => {
                let near_z = Self::panel_is_near(map, z);
                let near_0 = Self::panel_is_near(map, zero);
                if !near_z && !near_0 {
                    return self
                        .nodes
                        .iter()
                        .zip(&self.weights)
                        .map(|(&t, &m)| m * log_abs_1p(z / t))
                        .collect::<CompensatedSum>()
                        .value();
                }
                let n = self.coeffs.len();
                let mut k_of = |y: Complex64, near: bool| -> f64 {
                    let mut acc = CompensatedSum::new();
                    if near {
                        let (g, r) = (&mut sc.g[..n], &mut sc.r[..n]);
                        let c = Self::panel_log_moments(map, y, r, g);
                        acc.add(self.mass * c);
                        for k in 0..n {
                            acc.add(self.coeffs[k] * g[k]);
                        }
                    } else {
                        for (&t, &m) in self.nodes.iter().zip(&self.weights) {
                            acc.add(m * (y + t).norm().ln());
                        }
                    }
                    acc.value()
                };
                k_of(z, near_z) - k_of(zero, near_0)
            }
        }
    }

    /// `out[j]` = potential at `z` of a unit mass at node `j`, spread by the
    /// interpolant through the nodes.
    pub(crate) fn basis_row(&self, z: Complex64, sc: &mut Scratch, out: &mut [f64]) {
        let z = upper(z);
        let zero = Complex64::new(0.0, 0.0);
        let n = self.nodes.len();
        match &self.kind {
            Kind::Chebyshev { map, table } => {
                let g = &mut sc.g[..n];
                map.moments(z, g);
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = CompensatedSum::new();
                    acc.add(g[0]);
                    for p in 1..n {
                        acc.add(-2.0 * table[p][j] * g[p]);
                    }
                    *o = acc.value();
                }
            }
            Kind::Panel { map, rule } => {
                let near_z = Self::panel_is_near(map, z);
                let near_0 = Self::panel_is_near(map, zero);
                if !near_z && !near_0 {
                    for (o, &t) in out.iter_mut().zip(&self.nodes) {
                        *o = log_abs_1p(z / t);
                    }
                    return;
                }
                let mut fill = |y: Complex64, near: bool, sign: f64, out: &mut [f64]| {
                    if near {
                        let (g, r) = (&mut sc.g[..n], &mut sc.r[..n]);
                        let c = Self::panel_log_moments(map, y, r, g);
                        for (j, o) in out.iter_mut().enumerate() {
                            let mut acc = CompensatedSum::new();
                            acc.add(c);
                            for k in 0..n {
                                acc.add((2 * k + 1) as f64 / 2.0 * rule.table[k][j] * g[k]);
                            }
                            *o += sign * acc.value();
                        }
                    } else {
                        for (o, &t) in out.iter_mut().zip(&self.nodes) {
                            *o += sign * (y + t).norm().ln();
                        }
                    }
                };
                out.iter_mut().for_each(|o| *o = 0.0);
                fill(z, near_z, 1.0, out);
                fill(zero, near_0, -1.0, out);
            }
        }
    }

    /// `μ([lo, t])`.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return self.mass;
        }
        match &self.kind {
            Kind::Chebyshev { map, .. } => self.cheb_cumulative(map.to_x(t).clamp(-1.0, 1.0).acos()),
            Kind::Panel { map, .. } => self.panel_cumulative(map.to_s(t)),
        }
    }

    fn cheb_cumulative(&self, theta: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.coeffs[0] * (PI - theta));
        for p in 1..self.coeffs.len() {
            acc.add(-self.coeffs[p] * (p as f64 * theta).sin() / p as f64);
        }
        acc.value().clamp(0.0, self.mass)
    }

    fn panel_cumulative(&self, s: f64) -> f64 {
        let mut ints = vec![0.0; self.coeffs.len()];
        legendre_integrals(s, &mut ints);
        let acc: CompensatedSum = self.coeffs.iter().zip(&ints).map(|(c, i)| c * i).collect();
        acc.value().clamp(0.0, self.mass)
    }

    /// Smallest `t` with `μ([lo, t]) ≥ level`, for `0 ≤ level ≤ mass`.
    pub fn quantile(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return self.lo;
        }
        if level >= self.mass {
            return self.hi;
        }
        match &self.kind {
            Kind::Chebyshev { map, .. } => {
                // F(θ) decreases from mass at θ = 0 to 0 at θ = π; F' = −ψ(cos θ).
                let f = |th: f64| self.cheb_cumulative(th) - level;
                let df = |th: f64| {
                    -self.coeffs.iter().enumerate().map(|(p, c)| c * (p as f64 * th).cos()).sum::<f64>()
                };
                let th = safeguarded_newton(f, df, 0.0, PI, PI * (1.0 - level / self.mass), false);
                map.to_t(th.cos())
            }
            Kind::Panel { map, .. } => {
                let n = self.coeffs.len();
                let f = |s: f64| self.panel_cumulative(s) - level;
                let df = |s: f64| {
                    let mut p = vec![0.0; n];
                    legendre_values(s, &mut p);
                    self.coeffs.iter().zip(&p).map(|(c, v)| c * v).sum::<f64>()
                };
                let s = safeguarded_newton(f, df, -1.0, 1.0, 2.0 * level / self.mass - 1.0, true);
                map.to_t(s)
            }
        }
    }
}

/// Root of a monotone `f` on `[lo, hi]`: Newton steps, falling back to
/// bisection whenever a step leaves the bracket.
fn safeguarded_newton<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    increasing: bool,
) -> f64 {
    let mut x = start.clamp(lo, hi);
    for _ in 0..200 {
        let v = f(x);
        if v == 0.0 {
            return x;
        }
        if (v < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = if d != 0.0 { x - v / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON {
            return next;
        }
        x = next;
    }
    x
}

/// Nodes needed on an isolated interval of length `len` whose nearest
/// neighbour is `gap` away: the density is analytic inside the Bernstein
/// ellipse reaching that neighbour, so the error decays like `ρ^{-n}`.
fn chebyshev_count(len: f64, gap: f64) -> usize {
    if !gap.is_finite() {
        return 0;
    }
    let w = 1.0 + 2.0 * gap / len;
    let rho = w + (w * w - 1.0).sqrt();
    (CHEBYSHEV_DIGITS / rho.ln()).ceil() as usize
}

/// Splits the nondegenerate intervals of `set` into pieces. Chebyshev pieces
/// get at least `n` nodes, more when a neighbour is close. An endpoint needs
/// refinement when the gap to the neighbouring interval (or to the origin, when
/// it belongs to `E`) is shorter than a quarter of the interval.
pub(crate) fn layout(set: &IntervalSet, n: usize, panel_order: usize) -> Vec<PieceLayout> {
    let ivs: Vec<(f64, f64)> =
        set.intervals().iter().filter(|iv| !iv.is_degenerate()).map(|iv| (iv.lo, iv.hi)).collect();
    let mut out = Vec::new();
    for (k, &(a, b)) in ivs.iter().enumerate() {
        let len = b - a;
        let gap_left = if k > 0 {
            a - ivs[k - 1].1
        } else if set.includes_origin() {
            a
        } else {
            f64::INFINITY
        };
        let gap_right = ivs.get(k + 1).map_or(f64::INFINITY, |nx| nx.0 - b);
        let s_a = len.min(gap_left);
        let s_b = len.min(gap_right);
        if s_a >= 0.25 * len && s_b >= 0.25 * len {
            out.push(PieceLayout::Chebyshev { a, b, n: n.max(chebyshev_count(len, gap_left.min(gap_right))) });
            continue;
        }
        let mut left = Vec::new();
        let mut d = 0.25 * s_a;
        while d < 0.5 * len {
            left.push(a + d);
            d *= GRADING;
        }
        let mut right = Vec::new();
        let mut d = 0.25 * s_b;
        while d < 0.5 * len {
            right.push(b - d);
            d *= GRADING;
        }
        let mut breaks = vec![a];
        breaks.extend(left);
        breaks.extend(right.into_iter().rev());
        breaks.push(b);
        let m = breaks.len() - 1;
        for (i, w) in breaks.windows(2).enumerate() {
            let map = if i == 0 {
                PanelMap::Left { a: w[0], len: w[1] - w[0] }
            } else if i == m - 1 {
                PanelMap::Right { b: w[1], len: w[1] - w[0] }
            } else {
                PanelMap::Affine { c: w[0], d: w[1] }
            };
            out.push(PieceLayout::Panel { map, order: panel_order });
        }
    }
    out
}

/// The Riesz measure of a computed representative.
#[derive(Debug, Clone)]
pub struct RieszMeasure {
    pieces: Vec<MeasurePiece>,
    prefix: Vec<f64>,
}

impl RieszMeasure {
    pub(crate) fn new(pieces: Vec<MeasurePiece>) -> Self {
        let mut acc = CompensatedSum::new();
        let mut prefix = Vec::with_capacity(pieces.len() + 1);
        prefix.push(0.0);
        for p in &pieces {
            acc.add(p.mass);
            prefix.push(acc.value());
        }
        Self { pieces, prefix }
    }

    pub fn pieces(&self) -> &[MeasurePiece] {
        &self.pieces
    }

    /// All quadrature nodes `t_j`, ascending.
    pub fn nodes(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| p.nodes.iter().copied()).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| p.weights.iter().copied()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        *self.prefix.last().unwrap_or(&0.0)
    }

    /// `μ(r)`: mass of `E* ∩ [0, r]`. Continuous and nondecreasing.
    pub fn cumulative(&self, r: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.hi <= r);
        let base = self.prefix[k];
        match self.pieces.get(k) {
            Some(p) => (base + p.cumulative(r)).min(self.prefix[k + 1]),
            None => base,
        }
    }

    /// `inf{t : μ(t) ≥ level}` for `0 < level ≤ total_mass`.
    pub fn quantile(&self, level: f64) -> Option<f64> {
        if !(level > 0.0) || level > self.total_mass() {
            return None;
        }
        let k = (self.prefix.partition_point(|&m| m < level) - 1).min(self.pieces.len() - 1);
        Some(self.pieces[k].quantile(level - self.prefix[k]))
    }
}
