//! Numerical class-K representatives for truncated slit sets.
//!
//! The representative is `u(z) = u(0) + ∫ log|1 + z/t| dμ(t)` with `μ` carried
//! by the truncated set `E*`. The measure is discretized piecewise (see
//! [`crate::measure`]); the unknown node masses and `u(0)` are fixed by
//! requiring `u = 0` at every node on `E*` and `u(norm_point) = 1`.
//!
//! The square collocation system is equilibrated (row and column scaling,
//! iterated until the column scales settle) and solved by LU with partial
//! pivoting plus two steps of iterative refinement.

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::intervals::IntervalSet;
use crate::measure::{layout, log_abs_1p, upper, MeasurePiece, RieszMeasure, RuleCache, Scratch};
use crate::numeric::{fnv1a64, CompensatedSum};

/// Below this condition estimate the first equilibration is kept as is.
const WELL_CONDITIONED: f64 = 1e10;

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Chebyshev nodes on each interval that needs no local refinement.
    pub nodes_per_interval: usize,
    /// Gauss–Legendre nodes per panel on intervals that do.
    pub panel_order: usize,
    /// Target for the scaled boundary residual.
    pub tolerance: f64,
    pub norm_point: Complex64,
    /// Negative weights above `-clamp_rel · (piece max)` are set to zero.
    pub clamp_rel: f64,
    pub max_scaling_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            nodes_per_interval: 16,
            panel_order: 12,
            tolerance: 1e-9,
            norm_point: Complex64::new(1.0, 0.0),
            clamp_rel: 1e-8,
            max_scaling_rounds: 6,
        }
    }
}

impl SolveOptions {
    pub fn with_nodes(nodes_per_interval: usize) -> Self {
        Self { nodes_per_interval, ..Self::default() }
    }

    /// Both resolutions doubled, for refinement studies.
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_interval: 2 * self.nodes_per_interval,
            panel_order: 2 * self.panel_order,
            ..*self
        }
    }
}

/// What the solver observed while producing a representative.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveDiagnostics {
    pub unknowns: usize,
    /// 1-norm condition estimate of the equilibrated system.
    pub condition: f64,
    /// Max scaled residual at the collocation points.
    pub collocation_residual: f64,
    /// Max scaled residual on a check grid interlacing the nodes.
    pub check_residual: f64,
    pub clamped: usize,
    pub scaling_rounds: usize,
}

/// A computed representative of `u ∈ K` for a truncated set.
#[derive(Debug, Clone)]
pub struct HarmonicApprox {
    measure: RieszMeasure,
    u0: f64,
    trust_radius: f64,
    set: IntervalSet,
    nodes_per_interval: usize,
    panel_order: usize,
    /// Largest node count of any piece, for sizing evaluation buffers.
    max_order: usize,
    diagnostics: SolveDiagnostics,
}

impl HarmonicApprox {
    pub fn measure(&self) -> &RieszMeasure {
        &self.measure
    }

    /// `u(0)`.
    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    pub fn set(&self) -> &IntervalSet {
        &self.set
    }

    pub fn nodes_per_interval(&self) -> usize {
        self.nodes_per_interval
    }

    pub fn panel_order(&self) -> usize {
        self.panel_order
    }

    pub fn diagnostics(&self) -> &SolveDiagnostics {
        &self.diagnostics
    }

    /// `u(z)`, clamped at zero (the unclamped value differs only by solver
    /// residual, and only on or extremely near `E`).
    pub fn eval(&self, z: Complex64) -> f64 {
        self.eval_raw(z).max(0.0)
    }

    /// `u0 + Σ_k ∫ log|1 + z/t| dμ_k`, without clamping.
    pub fn eval_raw(&self, z: Complex64) -> f64 {
        self.eval_parts(z).0
    }

    /// Raw value together with the sum of absolute contributions, the natural
    /// scale against which rounding and residuals are measured.
    pub fn eval_parts(&self, z: Complex64) -> (f64, f64) {
        let mut sc = Scratch::new(self.max_order);
        let mut acc = CompensatedSum::new();
        acc.add(self.u0);
        let mut scale = self.u0.abs();
        for p in self.measure.pieces() {
            let d = p.potential(z, &mut sc);
            acc.add(d);
            scale += d.abs();
        }
        (acc.value(), scale)
    }

    /// The literal quadrature sum `u0 + Σ_j m_j log|1 + z/t_j|` over the nodes.
    /// Agrees with `eval` away from `E`; kept as an independent cross-check.
    pub fn eval_quadrature(&self, z: Complex64) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.u0);
        for p in self.measure.pieces() {
            for (&t, &m) in p.nodes().iter().zip(p.weights()) {
                acc.add(m * log_abs_1p(upper(z) / t));
            }
        }
        acc.value()
    }

    /// `μ(r)`.
    pub fn mu_cumulative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else {
            self.measure.cumulative(r)
        }
    }

    /// Plain-text table: `#` header lines, then `t_j m_j` rows.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# u0 {:?}\n", self.u0));
        s.push_str(&format!("# trust_radius {:?}\n", self.trust_radius));
        s.push_str(&format!("# set_hash {:016x}\n", self.set.content_hash()));
        s.push_str(&format!("# nodes_per_interval {}\n", self.nodes_per_interval));
        s.push_str(&format!("# panel_order {}\n", self.panel_order));
        s.push_str(&format!("# condition {:?}\n", self.diagnostics.condition));
        s.push_str(&format!("# check_residual {:?}\n", self.diagnostics.check_residual));
        for p in self.measure.pieces() {
            for (t, m) in p.nodes().iter().zip(p.weights()) {
                s.push_str(&format!("{t:?} {m:?}\n"));
            }
        }
        s
    }

    /// Rebuilds a representative from `to_table` output and the set it was
    /// solved on. The set fingerprint in the header must match.
    pub fn from_table(text: &str, set: &IntervalSet) -> Result<Self> {
        let mut u0 = None;
        let mut trust = None;
        let mut hash = None;
        let mut n = None;
        let mut order = None;
        let mut diagnostics = SolveDiagnostics::default();
        let mut weights = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let perr = |m: &str| Error::Parse { line: i + 1, message: m.to_string() };
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                let key = it.next().unwrap_or("");
                let val = it.next().ok_or_else(|| perr("header without value"))?;
                let num = || val.parse::<f64>().map_err(|_| perr("bad number"));
                let count = || val.parse::<usize>().map_err(|_| perr("bad count"));
                match key {
                    "u0" => u0 = Some(num()?),
                    "trust_radius" => trust = Some(num()?),
                    "set_hash" => {
                        hash = Some(u64::from_str_radix(val, 16).map_err(|_| perr("bad hash"))?)
                    }
                    "nodes_per_interval" => n = Some(count()?),
                    "panel_order" => order = Some(count()?),
                    "condition" => diagnostics.condition = num()?,
                    "check_residual" => diagnostics.check_residual = num()?,
                    _ => {}
                }
                continue;
            }
            let mut it = line.split_whitespace().map(|v| v.parse::<f64>());
            match (it.next(), it.next()) {
                (Some(Ok(_)), Some(Ok(m))) => weights.push(m),
                _ => return Err(perr("expected `t m`")),
            }
        }
        let missing = |k: &str| Error::Parse { line: 0, message: format!("missing header `{k}`") };
        let u0 = u0.ok_or_else(|| missing("u0"))?;
        let trust_radius = trust.ok_or_else(|| missing("trust_radius"))?;
        let hash = hash.ok_or_else(|| missing("set_hash"))?;
        let n = n.ok_or_else(|| missing("nodes_per_interval"))?;
        let order = order.ok_or_else(|| missing("panel_order"))?;
        if hash != set.content_hash() {
            return Err(Error::InvalidInput(format!(
                "table was solved on set {hash:016x}, not {:016x}",
                set.content_hash()
            )));
        }
        let lay = layout(set, n, order);
        let expected: usize = lay.iter().map(|p| p.order()).sum();
        if expected != weights.len() {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {expected} rows, found {}", weights.len()),
            });
        }
        let mut rules = RuleCache::default();
        let mut offset = 0;
        let mut pieces = Vec::with_capacity(lay.len());
        for p in &lay {
            let w = weights[offset..offset + p.order()].to_vec();
            offset += p.order();
            pieces.push(MeasurePiece::from_weights(p, &mut rules, w));
        }
        diagnostics.unknowns = weights.len() + 1;
        Ok(Self {
            measure: RieszMeasure::new(pieces),
            u0,
            trust_radius,
            set: set.clone(),
            nodes_per_interval: n,
            panel_order: order,
            max_order: lay.iter().map(|p| p.order()).max().unwrap_or(0),
            diagnostics,
        })
    }
}

/// Solves for the normalized class-K representative of a truncated set:
/// `u = 0` at every node on `E*` and `u(norm_point) = 1`.
pub fn solve(set: &IntervalSet, opts: &SolveOptions) -> Result<HarmonicApprox> {
    let n = opts.nodes_per_interval;
    if n < 4 || opts.panel_order < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 nodes per interval and per panel, got {n} and {}",
            opts.panel_order
        )));
    }
    let lay = layout(set, n, opts.panel_order);
    if lay.is_empty() {
        return Err(Error::InvalidInput("set has no nondegenerate interval".into()));
    }
    if lay[0].bounds().0 <= 0.0 {
        return Err(domain("solver requires every interval to have lo > 0"));
    }
    if opts.norm_point.im == 0.0 && set.contains(-opts.norm_point.re) {
        return Err(domain("normalization point lies on E"));
    }

    let mut rules = RuleCache::default();
    let bare: Vec<MeasurePiece> = lay.iter().map(|p| p.instantiate(&mut rules)).collect();
    let offsets: Vec<usize> = bare
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.nodes().len();
            Some(o)
        })
        .collect();
    let nodes: Vec<f64> = bare.iter().flat_map(|p| p.nodes().iter().copied()).collect();
    let nu = nodes.len();
    let dim = nu + 1;

    let mut targets: Vec<Complex64> = nodes.iter().map(|&t| Complex64::new(-t, 0.0)).collect();
    targets.push(opts.norm_point);
    let max_order = lay.iter().map(|p| p.order()).max().unwrap_or(0);
    let mut sc = Scratch::new(max_order);
    let mut row = vec![0.0; max_order];
    let mut a = Mat::<f64>::zeros(dim, dim);
    for (i, &z) in targets.iter().enumerate() {
        for (p, &off) in bare.iter().zip(&offsets) {
            let k = p.nodes().len();
            p.basis_row(z, &mut sc, &mut row[..k]);
            for j in 0..k {
                a[(i, off + j)] = row[j];
            }
        }
        a[(i, nu)] = 1.0;
    }
    let mut rhs = Mat::<f64>::zeros(dim, 1);
    rhs[(nu, 0)] = 1.0;

    // Column scales start from the half-line profile μ(t) ∝ √t and are refined
    // from the computed solution until they stop moving.
    let mut col_scale: Vec<f64> = Vec::with_capacity(dim);
    for p in &bare {
        let k = p.nodes().len();
        let s = (p.hi().sqrt() - p.lo().sqrt()) / k as f64;
        col_scale.extend(std::iter::repeat(s).take(k));
    }
    col_scale.push(1.0);

    let mut rounds = 0;
    let (x, condition) = loop {
        rounds += 1;
        let (x, condition) = scaled_solve(&a, &rhs, &col_scale)?;
        let mut next = col_scale.clone();
        for (p, &off) in bare.iter().zip(&offsets) {
            let k = p.nodes().len();
            let mean = (0..k).map(|j| x[(off + j, 0)].abs()).sum::<f64>() / k as f64;
            if mean > 0.0 && mean.is_finite() {
                next[off..off + k].iter_mut().for_each(|s| *s = mean);
            }
        }
        if x[(nu, 0)].abs() > 0.0 {
            next[nu] = x[(nu, 0)].abs();
        }
        let settled = next.iter().zip(&col_scale).all(|(a, b)| (0.25..=4.0).contains(&(a / b)));
        col_scale = next;
        if settled || condition < WELL_CONDITIONED || rounds >= opts.max_scaling_rounds {
            break (x, condition);
        }
    };
    if !x.col_as_slice(0).iter().all(|v| v.is_finite()) {
        return Err(Error::SolverFailure { reason: "non-finite solution".into(), condition });
    }
    if !(condition < 1e15) {
        return Err(Error::SolverFailure { reason: "system is numerically singular".into(), condition });
    }
    log::debug!("solve: {dim} unknowns, {rounds} scaling rounds, cond ≈ {condition:.3e}");

    let mut clamped = 0;
    let mut pieces = Vec::with_capacity(lay.len());
    for ((p, &off), l) in bare.iter().zip(&offsets).zip(&lay) {
        let k = p.nodes().len();
        let mut w: Vec<f64> = (0..k).map(|j| x[(off + j, 0)]).collect();
        let wmax = w.iter().fold(0.0_f64, |acc, &v| acc.max(v));
        for (j, v) in w.iter_mut().enumerate() {
            if *v < 0.0 {
                if -*v <= opts.clamp_rel * wmax {
                    *v = 0.0;
                    clamped += 1;
                } else {
                    return Err(Error::Nonpositive { node: nodes[off + j], weight: *v });
                }
            }
        }
        pieces.push(MeasurePiece::from_weights(l, &mut rules, w));
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} slightly negative Riesz weights to zero");
    }

    let mut h = HarmonicApprox {
        measure: RieszMeasure::new(pieces),
        u0: x[(nu, 0)],
        trust_radius: set.max_endpoint() / 10.0,
        set: set.clone(),
        nodes_per_interval: n,
        panel_order: opts.panel_order,
        max_order,
        diagnostics: SolveDiagnostics {
            unknowns: dim,
            condition,
            clamped,
            scaling_rounds: rounds,
            ..Default::default()
        },
    };
    h.diagnostics.collocation_residual = nodes
        .iter()
        .map(|&t| scaled_residual(&h, Complex64::new(-t, 0.0)))
        .fold(0.0, f64::max);
    h.diagnostics.check_residual = check_points(&h)
        .into_iter()
        .map(|t| scaled_residual(&h, Complex64::new(-t, 0.0)))
        .fold(0.0, f64::max);
    if h.diagnostics.check_residual > 10.0 * opts.tolerance {
        log::warn!(
            "boundary residual {:.3e} exceeds 10x tolerance {:.1e}; consider more nodes",
            h.diagnostics.check_residual,
            opts.tolerance
        );
    }
    Ok(h)
}

/// `|u(z)|` relative to the natural scale of the sum that produced it.
pub fn scaled_residual(h: &HarmonicApprox, z: Complex64) -> f64 {
    let (v, s) = h.eval_parts(z);
    if s > 0.0 {
        v.abs() / s
    } else {
        v.abs()
    }
}

/// Boundary check grid: points interlacing the collocation nodes of every
/// piece, piece endpoints included.
pub fn check_points(h: &HarmonicApprox) -> Vec<f64> {
    h.measure.pieces().iter().flat_map(|p| p.check_points()).collect()
}

/// Equilibrated LU solve with iterative refinement and a condition estimate.
fn scaled_solve(a: &Mat<f64>, rhs: &Mat<f64>, col_scale: &[f64]) -> Result<(Mat<f64>, f64)> {
    let dim = a.nrows();
    let row_scale: Vec<f64> = (0..dim)
        .map(|i| {
            let s: f64 = (0..dim).map(|j| a[(i, j)].abs() * col_scale[j]).sum();
            if s > 0.0 {
                1.0 / s
            } else {
                1.0
            }
        })
        .collect();
    let scaled = Mat::<f64>::from_fn(dim, dim, |i, j| row_scale[i] * a[(i, j)] * col_scale[j]);
    let lu = scaled.partial_piv_lu();
    let solve_orig = |r: &Mat<f64>| -> Mat<f64> {
        let rs = Mat::<f64>::from_fn(dim, 1, |i, _| row_scale[i] * r[(i, 0)]);
        let y = lu.solve(&rs);
        Mat::<f64>::from_fn(dim, 1, |i, _| col_scale[i] * y[(i, 0)])
    };
    let mut x = solve_orig(rhs);
    for _ in 0..2 {
        let r = rhs - &(a * &x);
        let dx = solve_orig(&r);
        x += &dx;
    }

    // Hager's estimate of ‖B⁻¹‖₁ for the scaled matrix B.
    let norm_b = (0..dim)
        .map(|j| (0..dim).map(|i| scaled[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut v = Mat::<f64>::from_fn(dim, 1, |_, _| 1.0 / dim as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&v);
        est = (0..dim).map(|i| y[(i, 0)].abs()).sum::<f64>();
        let xi = Mat::<f64>::from_fn(dim, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        let zt = lu.solve_transpose(&xi);
        let (jmax, zmax) = (0..dim)
            .map(|i| (i, zt[(i, 0)].abs()))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        let ztv: f64 = (0..dim).map(|i| zt[(i, 0)] * v[(i, 0)]).sum();
        if zmax <= ztv {
            break;
        }
        v = Mat::<f64>::zeros(dim, 1);
        v[(jmax, 0)] = 1.0;
    }
    Ok((x, norm_b * est))
}

/// Green's function of `C \ [−b, −a]` with pole at infinity:
/// `log|φ + √(φ²−1)|`, `φ = (2z + a + b)/(b − a)`.
pub fn oracle_green_segment(a: f64, b: f64, z: Complex64) -> Result<f64> {
    if !(0.0 < a && a < b) {
        return Err(domain(format!("segment oracle needs 0 < a < b, got a = {a}, b = {b}")));
    }
    let phi = (2.0 * z + a + b) / (b - a);
    let zeta = phi + (phi - 1.0).sqrt() * (phi + 1.0).sqrt();
    Ok(zeta.norm().ln().max(0.0))
}

/// The class-K function of the full slit `(−∞, 0]`: `√r cos(θ/2)`.
pub fn oracle_halfline(z: Complex64) -> f64 {
    // Re √z with the principal branch is exactly √r cos(θ/2), θ ∈ (−π, π].
    upper(z).sqrt().re.max(0.0)
}

/// Content fingerprint of a representative, used in reports.
pub fn table_hash(h: &HarmonicApprox) -> u64 {
    fnv1a64(h.to_table().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::{Interval, IntervalSet};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn segment(a: f64, b: f64) -> IntervalSet {
        IntervalSet::new(vec![Interval::new(a, b).unwrap()], false)
    }

    #[test]
    fn segment_oracle_values() {
        assert_relative_eq!(oracle_green_segment(1.0, 2.0, c(0.0, 0.0)).unwrap(), 1.76275, epsilon = 1e-5);
        assert_relative_eq!(oracle_green_segment(1.0, 2.0, c(1.0, 0.0)).unwrap(), 2.29243, epsilon = 1e-5);
        assert_eq!(oracle_green_segment(1.0, 2.0, c(-1.5, 0.0)).unwrap(), 0.0);
        assert!(oracle_green_segment(2.0, 1.0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn halfline_oracle_values() {
        assert_relative_eq!(oracle_halfline(c(4.0, 0.0)), 2.0);
        assert_eq!(oracle_halfline(c(-4.0, 0.0)), 0.0);
        assert_eq!(oracle_halfline(c(-4.0, -0.0)), 0.0);
        assert_relative_eq!(oracle_halfline(c(0.0, 4.0)), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn single_segment_matches_oracle() {
        let h = solve(&segment(1.0, 2.0), &SolveOptions::with_nodes(64)).unwrap();
        let g1 = oracle_green_segment(1.0, 2.0, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(h.eval(c(1.0, 0.0)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(h.u0(), 0.76894, epsilon = 1e-3);
        for z in [c(0.0, 0.0), c(10.0, 0.0), c(-3.0, 0.5), c(2.0, -7.0)] {
            let want = oracle_green_segment(1.0, 2.0, z).unwrap() / g1;
            assert_relative_eq!(h.eval(z), want, max_relative = 1e-9);
        }
        assert!(h.eval(c(-1.5, 0.0)) < 1e-12);
        assert!(h.diagnostics().check_residual < 1e-10);
    }

    #[test]
    fn quadrature_sum_agrees_off_the_slit() {
        let h = solve(&segment(1.0, 2.0), &SolveOptions::with_nodes(32)).unwrap();
        for z in [c(5.0, 0.0), c(-6.0, 2.0), c(0.0, 3.0)] {
            assert_relative_eq!(h.eval_quadrature(z), h.eval(z), max_relative = 1e-8);
        }
    }

    #[test]
    fn cumulative_and_quantile_are_inverse() {
        let h = solve(&segment(1.0, 2.0), &SolveOptions::with_nodes(16)).unwrap();
        let m = h.measure();
        assert_eq!(h.mu_cumulative(0.5), 0.0);
        assert_relative_eq!(h.mu_cumulative(3.0), m.total_mass(), max_relative = 1e-14);
        for frac in [0.1, 0.37, 0.5, 0.9] {
            let level = frac * m.total_mass();
            let t = m.quantile(level).unwrap();
            assert_relative_eq!(m.cumulative(t), level, max_relative = 1e-10);
        }
    }

    #[test]
    fn table_round_trip() {
        let set = segment(1.0, 2.0);
        let h = solve(&set, &SolveOptions::with_nodes(8)).unwrap();
        let back = HarmonicApprox::from_table(&h.to_table(), &set).unwrap();
        assert_eq!(back.u0(), h.u0());
        assert_eq!(back.to_table(), h.to_table());
        assert!(HarmonicApprox::from_table(&h.to_table(), &segment(1.0, 3.0)).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            solve(&segment(1.0, 2.0), &SolveOptions::with_nodes(3)),
            Err(Error::InvalidInput(_))
        ));
        assert!(solve(&IntervalSet::empty(), &SolveOptions::default()).is_err());
    }
}
