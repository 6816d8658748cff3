//! Gauss–Legendre rules and exact logarithmic moments of Legendre polynomials,
//! the ingredients of product integration on panels.

use num_complex::Complex64;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]` with its Legendre table.
#[derive(Debug, Clone)]
pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    #[allow(dead_code)] // panels only need the nodes; the tests use the weights
    pub weights: Vec<f64>,
    /// `table[k][j] = P_k(nodes[j])` for `k < n`.
    pub table: Vec<Vec<f64>>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        let mut table = vec![vec![0.0; n]; n];
        let mut vals = vec![0.0; n];
        for (j, &x) in nodes.iter().enumerate() {
            legendre_values(x, &mut vals);
            for k in 0..n {
                table[k][j] = vals[k];
            }
        }
        Self { nodes, weights, table }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// `out[k] = P_k(x)`.
pub(crate) fn legendre_values(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for k in 1..n.saturating_sub(1) {
        out[k + 1] = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
    }
}

/// `∫_{-1}^{s} P_k(σ) dσ`: `s + 1` for `k = 0`, `(P_{k+1} − P_{k−1})/(2k+1)` otherwise.
pub(crate) fn legendre_integrals(s: f64, out: &mut [f64]) {
    let n = out.len();
    let mut p = vec![0.0; n + 1];
    legendre_values(s, &mut p);
    for k in 0..n {
        out[k] = if k == 0 { s + 1.0 } else { (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64 };
    }
}

/// Bernstein ellipse parameter of `w` with respect to `[-1, 1]`: `|w + √(w²−1)|`
/// on the branch where it is `≥ 1`.
pub(crate) fn bernstein_rho(w: Complex64) -> f64 {
    let s = (w - 1.0).sqrt() * (w + 1.0).sqrt();
    (w + s).norm().max((w - s).norm())
}

/// `out[k] = ∫_{-1}^{1} P_k(s) log|s − w| ds` for `k < out.len()`.
///
/// Uses `∫ P_k log(w − s) ds = 2(Q_{k+1}(w) − Q_{k−1}(w))/(2k+1)` with the
/// Legendre functions of the second kind, generated by forward recurrence near
/// the segment and by Miller's backward recurrence away from it.
pub(crate) fn log_moments(w: Complex64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let mut w = w;
    // The moments are continuous at ±1 but the formulas below are not.
    if (w - 1.0).norm() < 1e-13 || (w + 1.0).norm() < 1e-13 {
        w += Complex64::new(0.0, 1e-13);
    }
    let xlogx = |u: Complex64| if u.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { u * u.ln() };
    out[0] = (xlogx(w + 1.0) - xlogx(w - 1.0)).re - 2.0;
    if n == 1 {
        return;
    }
    let q = legendre_q(w, n + 1);
    for k in 1..n {
        out[k] = 2.0 * (q[k + 1] - q[k - 1]).re / (2 * k + 1) as f64;
    }
}

/// `Q_0(w) .. Q_{m−1}(w)`, `Q_k(w) = ½∫ P_k(s)/(w − s) ds`. On the segment
/// itself only the real parts (principal values) are meaningful.
fn legendre_q(w: Complex64, m: usize) -> Vec<Complex64> {
    let q0 = 0.5 * ((w + 1.0) / (w - 1.0)).ln();
    let mut q = vec![Complex64::new(0.0, 0.0); m];
    q[0] = q0;
    if m == 1 {
        return q;
    }
    let rho = bernstein_rho(w);
    if rho < 1.3 || w.im == 0.0 && w.re.abs() <= 1.0 {
        q[1] = w * q0 - 1.0;
        for k in 1..m - 1 {
            q[k + 1] = ((2 * k + 1) as f64 * w * q[k] - k as f64 * q[k - 1]) / (k + 1) as f64;
        }
    } else {
        // Q_k decays like ρ^{−k}; start far enough out that the dominant
        // solution has died away by k = m.
        let extra = (40.0 / rho.ln()).ceil() as usize + 10;
        let top = m + extra;
        let mut hi = Complex64::new(0.0, 0.0);
        let mut cur = Complex64::new(1e-30, 0.0);
        for k in (1..=top).rev() {
            let lo = ((2 * k + 1) as f64 * w * cur - (k + 1) as f64 * hi) / k as f64;
            hi = cur;
            cur = lo;
            if k - 1 < m {
                q[k - 1] = cur;
            } else {
                // Keep magnitudes bounded until values start being stored.
                let s = cur.norm();
                if s > 1e100 {
                    cur /= s;
                    hi /= s;
                }
            }
        }
        let scale = q0 / q[0];
        for v in q.iter_mut() {
            *v *= scale;
        }
    }
    q
}
