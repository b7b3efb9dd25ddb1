//! Spherical functions of the rotation pair on the `(n-1)`-sphere.
//!
//! For `n >= 3` the functions handled here are the normalized Gegenbauer
//! (ultraspherical) polynomials
//!
//! ```text
//!     phi_k(x) = C_k^{lambda}(x) / C_k^{lambda}(1),    lambda = (n-2)/2,
//! ```
//!
//! the zonal spherical functions of the pair `(SO(n), SO(n-1))`. They are the
//! eigenvalues of the operator averaging a function on the sphere over the
//! locus `{y : <x, y> = delta}`, acting on degree-`k` spherical harmonics.
//! For `n = 3` they reduce to the Legendre polynomials `P_k`.
//!
//! Two independent evaluation routes are provided and cross-checked:
//! a normalized three-term recurrence (primary, exact at `x = 1`), and the
//! contour-integral representation
//!
//! ```text
//!     phi_k(x) = c_n * int_0^pi (x + i sqrt(1-x^2) cos t)^k sin^{n-3} t dt,
//!     c_n = Gamma((n-1)/2) / (sqrt(pi) Gamma((n-2)/2)),
//! ```
//!
//! evaluated by adaptive Gauss-Legendre quadrature. The degree-`k` harmonic
//! multiplicity `m_k = (n+k-3)! (n+2k-2) / ((n-2)! k!)` is computed in exact
//! integer arithmetic.

use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{adaptive_complex, GaussLegendre};

/// Ambient dimension `n >= 3`; the sphere is `S^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SphereDim(u32);

impl SphereDim {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!(
                "ambient dimension must be at least 3, got {n}"
            )));
        }
        Ok(SphereDim(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Gegenbauer parameter `lambda = (n-2)/2`.
    pub fn lambda(self) -> f64 {
        (self.0 as f64 - 2.0) / 2.0
    }

    /// Strict Schatten membership threshold `2 + 2/(n-2)`: the averaging
    /// operator at `|delta| < 1` lies in `S^p` exactly when `p` exceeds this.
    pub fn schatten_threshold(self) -> f64 {
        2.0 + 2.0 / (self.0 as f64 - 2.0)
    }
}

impl std::fmt::Display for SphereDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A function value with an absolute error estimate.
#[derive(Debug, Clone, Copy)]
pub struct PhiValue {
    pub value: f64,
    pub abs_error: f64,
}

/// Value from the quadrature backend; the imaginary part of the integral
/// must vanish by symmetry and is reported for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct QuadValue {
    pub value: f64,
    pub abs_error: f64,
    pub imag_abs: f64,
}

/// `Gamma(half/2)` for positive integer `half`, by the functional equation.
/// Exact rational/radical values, so no general gamma approximation is
/// needed anywhere in the crate.
fn gamma_half_integer(half: u32) -> f64 {
    assert!(half >= 1);
    if half.is_multiple_of(2) {
        let m = half / 2;
        let mut acc = 1.0;
        for j in 1..m {
            acc *= j as f64;
        }
        acc
    } else {
        let m = (half - 1) / 2;
        let mut acc = std::f64::consts::PI.sqrt();
        for j in 0..m {
            acc *= j as f64 + 0.5;
        }
        acc
    }
}

/// Normalization constant `c_n` of the integral representation.
pub fn normalization_constant(n: SphereDim) -> f64 {
    let n = n.get();
    gamma_half_integer(n - 1) / (std::f64::consts::PI.sqrt() * gamma_half_integer(n - 2))
}

fn check_x_closed(x: f64) -> Result<()> {
    if !x.is_finite() || !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "evaluation point must lie in [-1, 1], got {x}"
        )));
    }
    Ok(())
}

/// Streaming evaluator of `phi_0(x), phi_1(x), ...` for fixed `x`.
///
/// The normalized recurrence
/// `phi_k = (2(k+lambda-1) x phi_{k-1} - (k-1) phi_{k-2}) / (k + 2 lambda - 1)`
/// is O(1) per degree, which keeps million-term Schatten sums linear time.
#[derive(Debug, Clone)]
pub struct PhiSeries {
    lambda: f64,
    x: f64,
    k: u32,
    prev: f64, // phi_{k-2} once k >= 2
    curr: f64, // phi_{k-1} once k >= 1
}

impl PhiSeries {
    pub fn new(n: SphereDim, x: f64) -> Result<Self> {
        check_x_closed(x)?;
        Ok(PhiSeries {
            lambda: n.lambda(),
            x,
            k: 0,
            prev: 0.0,
            curr: 0.0,
        })
    }
}

impl Iterator for PhiSeries {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let value = match self.k {
            0 => 1.0,
            1 => self.x,
            k => {
                let kf = k as f64;
                (2.0 * (kf + self.lambda - 1.0) * self.x * self.curr - (kf - 1.0) * self.prev)
                    / (kf + 2.0 * self.lambda - 1.0)
            }
        };
        self.prev = self.curr;
        self.curr = value;
        self.k += 1;
        Some(value)
    }
}

/// Streaming evaluator of `(phi_k(x), phi_k'(x))` pairs, differentiating the
/// recurrence term by term.
#[derive(Debug, Clone)]
pub struct PhiJetSeries {
    lambda: f64,
    x: f64,
    k: u32,
    prev: (f64, f64),
    curr: (f64, f64),
}

impl PhiJetSeries {
    pub fn new(n: SphereDim, x: f64) -> Result<Self> {
        check_x_closed(x)?;
        Ok(PhiJetSeries {
            lambda: n.lambda(),
            x,
            k: 0,
            prev: (0.0, 0.0),
            curr: (0.0, 0.0),
        })
    }
}

impl Iterator for PhiJetSeries {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let pair = match self.k {
            0 => (1.0, 0.0),
            1 => (self.x, 1.0),
            k => {
                let kf = k as f64;
                let a = 2.0 * (kf + self.lambda - 1.0);
                let d = kf + 2.0 * self.lambda - 1.0;
                let v = (a * self.x * self.curr.0 - (kf - 1.0) * self.prev.0) / d;
                let dv = (a * (self.x * self.curr.1 + self.curr.0) - (kf - 1.0) * self.prev.1) / d;
                (v, dv)
            }
        };
        self.prev = self.curr;
        self.curr = pair;
        self.k += 1;
        Some(pair)
    }
}

/// Rounding-error model for the recurrence: each step loses a few ulps and
/// the values are bounded by 1, so the growth is linear in the degree.
fn recurrence_error(k: u32) -> f64 {
    4.0 * f64::EPSILON * (k as f64 + 1.0)
}

/// `phi_k(x)` by the normalized recurrence. Exact at `x = +/-1`.
pub fn phi(n: SphereDim, k: u32, x: f64) -> Result<PhiValue> {
    let mut series = PhiSeries::new(n, x)?;
    let value = series.nth(k as usize).unwrap();
    Ok(PhiValue {
        value,
        abs_error: recurrence_error(k),
    })
}

/// `phi_k'(x)` by the differentiated recurrence. The endpoints are rejected
/// to match the integral representation, whose derivative kernel carries a
/// `1/sqrt(1-x^2)` factor.
pub fn phi_derivative(n: SphereDim, k: u32, x: f64) -> Result<PhiValue> {
    check_x_closed(x)?;
    if x.abs() == 1.0 {
        return Err(Error::Domain(
            "derivative evaluation at |x| = 1 is a singular endpoint of the integral kernel".into(),
        ));
    }
    let mut series = PhiJetSeries::new(n, x)?;
    let (_, dv) = series.nth(k as usize).unwrap();
    Ok(PhiValue {
        value: dv,
        // The derivative recurrence compounds the same few-ulp losses but on
        // values growing up to O(k^2) (|phi_k'| <= k(k+n-2)/(n-1) at the
        // endpoints), hence the quadratic factor.
        abs_error: 4.0 * f64::EPSILON * ((k as f64 + 1.0) * (k as f64 + 1.0)),
    })
}

fn quad_rule_for_degree(k: u32) -> std::sync::Arc<GaussLegendre> {
    // Node count grows linearly with the oscillation count, capped where
    // adaptive bisection takes over.
    GaussLegendre::cached((12 + k as usize).min(80))
}

/// `phi_k(x)` by adaptive quadrature of the integral representation.
///
/// `tol` is the bisection acceptance tolerance; the returned `abs_error` is
/// the accumulated bisection disagreement plus a rounding allowance, with
/// the (should-be-zero) imaginary part of the integral folded in.
pub fn phi_quadrature(n: SphereDim, k: u32, x: f64, tol: f64) -> Result<QuadValue> {
    check_x_closed(x)?;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let sin_pow = n.get() as i32 - 3;
    let kk = k as i32;
    let f = move |t: f64| {
        // (x + i s cos t)^k in polar form; r = 0 only when the base itself
        // vanishes, where the k-th power is exactly zero for k >= 1.
        let re = x;
        let im = s * t.cos();
        let r = re.hypot(im);
        let zk = if r == 0.0 {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            let theta = im.atan2(re);
            Complex64::from_polar(r.powi(kk), theta * k as f64)
        };
        let w = if sin_pow == 0 {
            1.0
        } else {
            t.sin().max(0.0).powi(sin_pow)
        };
        zk * w
    };
    let rule = quad_rule_for_degree(k);
    let (integral, bisect_err) = adaptive_complex(&f, 0.0, std::f64::consts::PI, &rule, tol, 42);
    let c = normalization_constant(n);
    let imag_abs = (c * integral.im).abs();
    Ok(QuadValue {
        value: c * integral.re,
        abs_error: c * bisect_err + f64::EPSILON * (k as f64 + 4.0) + imag_abs,
        imag_abs,
    })
}

/// `phi_k'(x)` by quadrature of the differentiated integral kernel
/// `k (1 - i x cos t / sqrt(1-x^2)) (x + i sqrt(1-x^2) cos t)^{k-1}`.
pub fn phi_derivative_quadrature(n: SphereDim, k: u32, x: f64, tol: f64) -> Result<QuadValue> {
    check_x_closed(x)?;
    if x.abs() == 1.0 {
        return Err(Error::Domain(
            "derivative kernel is singular at |x| = 1".into(),
        ));
    }
    if k == 0 {
        return Ok(QuadValue {
            value: 0.0,
            abs_error: 0.0,
            imag_abs: 0.0,
        });
    }
    let s = (1.0 - x * x).sqrt();
    let sin_pow = n.get() as i32 - 3;
    let km1 = k as i32 - 1;
    let f = move |t: f64| {
        let re = x;
        let im = s * t.cos();
        let r = re.hypot(im);
        let zk = if r == 0.0 {
            if k == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            let theta = im.atan2(re);
            Complex64::from_polar(r.powi(km1), theta * (k as f64 - 1.0))
        };
        let jac = Complex64::new(1.0, -x * t.cos() / s) * k as f64;
        let w = if sin_pow == 0 {
            1.0
        } else {
            t.sin().max(0.0).powi(sin_pow)
        };
        zk * jac * w
    };
    let rule = quad_rule_for_degree(k);
    let (integral, bisect_err) = adaptive_complex(&f, 0.0, std::f64::consts::PI, &rule, tol, 42);
    let c = normalization_constant(n);
    let imag_abs = (c * integral.im).abs();
    Ok(QuadValue {
        value: c * integral.re,
        abs_error: c * bisect_err + f64::EPSILON * (k as f64 + 4.0) * (1.0 + 1.0 / s) + imag_abs,
        imag_abs,
    })
}

/// Evaluate by both backends and require agreement within their combined
/// error bounds (with a safety factor and an absolute floor); returns the
/// recurrence value with the combined bound.
pub fn phi_checked(n: SphereDim, k: u32, x: f64, quad_tol: f64) -> Result<PhiValue> {
    let rec = phi(n, k, x)?;
    let quad = phi_quadrature(n, k, x, quad_tol)?;
    let combined = rec.abs_error + quad.abs_error;
    let diff = (rec.value - quad.value).abs();
    if diff > 1e-9 + 16.0 * combined {
        return Err(Error::Internal(format!(
            "spherical function backends disagree at n={n} k={k} x={x}: \
             recurrence {} vs quadrature {} (diff {diff:.3e}, budget {:.3e})",
            rec.value,
            quad.value,
            1e-9 + 16.0 * combined,
        )));
    }
    Ok(PhiValue {
        value: rec.value,
        abs_error: combined + diff,
    })
}

/// Exact multiplicity `m_k = (n+k-3)! (n+2k-2) / ((n-2)! k!)` of the
/// degree-`k` eigenvalue: the dimension of the spherical harmonics of
/// degree `k` on `S^{n-1}`.
pub fn multiplicity(n: SphereDim, k: u32) -> Result<u64> {
    let n = n.get() as u64;
    let k = k as u64;
    if k == 0 {
        return Ok(1);
    }
    // Cheap logarithmic overflow screen before exact arithmetic: the product
    // below has k-1 factors and must not be attempted for astronomically
    // large k. ln m_k = ln(n+2k-2) + ln (n+k-3)! - ln (n-2)! - ln k!.
    let ln_fact = |m: u64| -> f64 {
        let z = m as f64 + 1.0;
        (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * z)
    };
    let ln_m = ((n + 2 * k - 2) as f64).ln() + ln_fact(n + k - 3) - ln_fact(n - 2) - ln_fact(k);
    if ln_m > 64.0 * std::f64::consts::LN_2 + 2.0 {
        return Err(Error::Overflow(format!(
            "multiplicity for n={n}, k={k} exceeds u64 range"
        )));
    }
    // Exact: numerator (n+2k-2) * prod_{j=1}^{k-1} (n-2+j), denominator k!.
    let mut num = BigUint::from(n + 2 * k - 2);
    let mut den = BigUint::from(1u64);
    for j in 1..k {
        num *= BigUint::from(n - 2 + j);
        den *= BigUint::from(j);
    }
    den *= BigUint::from(k);
    let (q, r) = num_integer_div_rem(&num, &den);
    if r != BigUint::from(0u64) {
        return Err(Error::Internal(format!(
            "multiplicity product for n={n}, k={k} is not an integer"
        )));
    }
    u64::try_from(&q)
        .map_err(|_| Error::Overflow(format!("multiplicity for n={n}, k={k} exceeds u64 range")))
}

fn num_integer_div_rem(a: &BigUint, b: &BigUint) -> (BigUint, BigUint) {
    (a / b, a % b)
}

/// Empirical decay-envelope constants on a grid: the smallest `C` with
/// `|phi_k(x)| <= C / (k (1-x^2))^{(n-2)/2}` over the scanned range, and the
/// analogous constant for the derivative inequality, which carries an extra
/// factor `k / sqrt(1-x^2)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayFit {
    pub n: u32,
    pub k_min: u32,
    pub k_max: u32,
    pub x_grid: Vec<f64>,
    /// sup of |phi_k(x)| (k(1-x^2))^{(n-2)/2}
    pub c_emp: f64,
    /// sup of |phi_k'(x)| (k(1-x^2))^{(n-2)/2} sqrt(1-x^2)/k
    pub c_deriv_emp: f64,
}

/// Fit both envelope constants over `1 <= k <= k_max` and the given interior
/// grid points.
pub fn decay_fit(n: SphereDim, k_max: u32, x_grid: &[f64]) -> Result<DecayFit> {
    if k_max < 1 {
        return Err(Error::Argument("k_max must be at least 1".into()));
    }
    if x_grid.is_empty() {
        return Err(Error::Argument("empty evaluation grid".into()));
    }
    let lambda = n.lambda();
    let mut c_emp: f64 = 0.0;
    let mut c_deriv: f64 = 0.0;
    for &x in x_grid {
        check_x_closed(x)?;
        if x.abs() >= 1.0 {
            return Err(Error::Domain(
                "decay envelope requires interior points |x| < 1".into(),
            ));
        }
        let one_minus = 1.0 - x * x;
        let mut jet = PhiJetSeries::new(n, x)?;
        jet.next(); // skip k = 0
        for k in 1..=k_max {
            let (v, dv) = jet.next().unwrap();
            let w = (k as f64 * one_minus).powf(lambda);
            c_emp = c_emp.max(v.abs() * w);
            c_deriv = c_deriv.max(dv.abs() * w * one_minus.sqrt() / k as f64);
        }
    }
    Ok(DecayFit {
        n: n.get(),
        k_min: 1,
        k_max,
        x_grid: x_grid.to_vec(),
        c_emp,
        c_deriv_emp: c_deriv,
    })
}

/// Empirical constant of the combined smallness/Lipschitz estimate
/// `|phi_k(x) - phi_k(0)| <= C k^{-(n-2)/2} min(1, k |x|)` on a grid in
/// `[-1/2, 1/2]`.
pub fn lipschitz_fit(n: SphereDim, k_max: u32, x_grid: &[f64]) -> Result<f64> {
    let lambda = n.lambda();
    let mut at_zero = Vec::with_capacity(k_max as usize + 1);
    at_zero.extend(PhiSeries::new(n, 0.0)?.take(k_max as usize + 1));
    let mut c: f64 = 0.0;
    for &x in x_grid {
        if x.abs() > 0.5 {
            return Err(Error::Domain(
                "Lipschitz envelope is fitted on [-1/2, 1/2]".into(),
            ));
        }
        if x == 0.0 {
            continue;
        }
        let series = PhiSeries::new(n, x)?;
        for (k, v) in series.take(k_max as usize + 1).enumerate().skip(1) {
            let kf = k as f64;
            let bound_shape = kf.powf(-lambda) * (kf * x.abs()).min(1.0);
            c = c.max((v - at_zero[k]).abs() / bound_shape);
        }
    }
    Ok(c)
}

/// A verified table of `phi_k(x)` values over a degree range and point grid.
#[derive(Debug, Clone)]
pub struct SphericalFunctionTable {
    pub n: u32,
    pub c_n: f64,
    pub k_max: u32,
    pub x_grid: Vec<f64>,
    /// Rows in (k outer, x inner) order.
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub k: u32,
    pub x: f64,
    pub value: f64,
    pub abs_error: f64,
}

impl SphericalFunctionTable {
    /// Build the table with both backends cross-checked per entry.
    pub fn build(n: SphereDim, k_max: u32, x_grid: &[f64], quad_tol: f64) -> Result<Self> {
        for &x in x_grid {
            check_x_closed(x)?;
        }
        let entries: Vec<(u32, f64)> = (0..=k_max)
            .flat_map(|k| x_grid.iter().map(move |&x| (k, x)))
            .collect();
        let rows: Result<Vec<TableRow>> = entries
            .par_iter()
            .map(|&(k, x)| {
                let pv = phi_checked(n, k, x, quad_tol)?;
                Ok(TableRow {
                    k,
                    x,
                    value: pv.value,
                    abs_error: pv.abs_error,
                })
            })
            .collect();
        Ok(SphericalFunctionTable {
            n: n.get(),
            c_n: normalization_constant(n),
            k_max,
            x_grid: x_grid.to_vec(),
            rows: rows?,
        })
    }

    /// CSV rows `n,k,x,value,abs_error`; `header_comment` lines are emitted
    /// first, each prefixed with `# `.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, header_comment: &[String]) -> Result<()> {
        for line in header_comment {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "n,k,x,value,abs_error")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.n, row.k, row.x, row.value, row.abs_error
            )?;
        }
        Ok(())
    }
}
