//! Gauss-Legendre quadrature with adaptive interval bisection.
//!
//! The spherical-function integrals evaluated in this crate have smooth but
//! increasingly oscillatory integrands (roughly `k` oscillations for the
//! degree-`k` function), so a fixed rule is paired with recursive bisection:
//! an interval is accepted once the rule applied to the whole interval and
//! the sum over its two halves agree, and the accumulated disagreement is
//! reported as the error estimate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Nodes and weights of the `m`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the `m`-point rule by Newton iteration on the Legendre
    /// polynomial `P_m`, starting from the Chebyshev-like angle estimates
    /// of its roots. Exact (to rounding) for polynomials of degree `2m-1`.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            // Initial guess for the i-th root (descending order).
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Evaluate P_m(x) and P_m'(x) by the three-term recurrence.
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=m {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if m == 1 { x } else { p1 };
                dp = mf * (x * p - p0) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared, cached rule; rules are reused heavily when tabulating one
    /// degree over many evaluation points.
    pub fn cached(m: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry(m)
            .or_insert_with(|| Arc::new(GaussLegendre::new(m)))
            .clone()
    }

    /// Apply the rule to `f` on `[a, b]`.
    pub fn integrate_complex(&self, a: f64, b: f64, f: &impl Fn(f64) -> Complex64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }
}

/// Adaptive integral of a complex-valued function on `[a, b]`.
///
/// Returns `(value, error_estimate)` where the estimate is the sum of the
/// final whole-vs-halves disagreements over all accepted intervals. The
/// interval tree is explored depth-first with the tolerance split evenly
/// between halves, so the subdivision (and therefore the result) is fully
/// deterministic.
pub fn adaptive_complex(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    rule: &GaussLegendre,
    tol: f64,
    max_depth: u32,
) -> (Complex64, f64) {
    fn go(
        f: &impl Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        whole: Complex64,
        rule: &GaussLegendre,
        tol: f64,
        depth: u32,
    ) -> (Complex64, f64) {
        let mid = 0.5 * (a + b);
        let left = rule.integrate_complex(a, mid, f);
        let right = rule.integrate_complex(mid, b, f);
        let delta = (left + right - whole).norm();
        if delta <= tol || depth == 0 {
            return (left + right, delta);
        }
        let (lv, le) = go(f, a, mid, left, rule, 0.5 * tol, depth - 1);
        let (rv, re) = go(f, mid, b, right, rule, 0.5 * tol, depth - 1);
        (lv + rv, le + re)
    }
    let whole = rule.integrate_complex(a, b, f);
    go(f, a, b, whole, rule, tol, max_depth)
}
