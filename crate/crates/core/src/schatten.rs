//! Schatten-class analysis of the sphere-averaging operators.
//!
//! The operator `T_delta` averaging over `{y : <x,y> = delta}` acts on the
//! degree-`k` spherical harmonics as the scalar `phi_k(delta)`, so all of
//! its spectral data is the diagonal sequence `(m_k, phi_k(delta))` and the
//! `S^p` norm is the weighted power sum
//!
//! ```text
//!     ||T_delta||_{S^p}^p = sum_{k >= 0} m_k |phi_k(delta)|^p.
//! ```
//!
//! Truncation tails are certified through the envelope pair
//! `m_k <= n k^{n-2}` (exact: `m_k / k^{n-2}` is a product of factors each
//! nonincreasing in `k`, so its sup is attained at `k = 1` where it equals
//! `n`) and `|phi_k| <= C_emp k^{-(n-2)/2}` with `C_emp` the running maximum
//! of `k^{(n-2)/2} |phi_k|` over the summed range, inflated by a fixed
//! safety factor because the running maximum can approach its supremum from
//! below. The integral test then bounds the discarded tail by
//! `n (1.05 C_emp)^p K^{1-s} / (s-1)` with `s = (n-2)(p-2)/2`, which is
//! finite exactly when `p` exceeds the strict threshold `2 + 2/(n-2)`.
//!
//! Everything here streams: terms are produced by O(1) recurrences and
//! summed sequentially in degree order, so results are deterministic and
//! million-term sums stay cheap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gegenbauer::{multiplicity, phi, PhiSeries, SphereDim};

/// Hard cap on the number of summed degrees before reporting truncation.
pub const K_CAP: u32 = 1 << 20;

/// Safety inflation applied to the empirical envelope constant when it is
/// extrapolated beyond the summed range.
const ENVELOPE_SAFETY: f64 = 1.05;

/// Diagonal model of the averaging operator `T_delta` on `L^2(S^{n-1})`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralOperator {
    n: SphereDim,
    delta: f64,
}

impl SpectralOperator {
    pub fn new(n: SphereDim, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta.abs() > 1.0 {
            return Err(Error::Domain(format!(
                "averaging height must lie in [-1, 1], got {delta}"
            )));
        }
        Ok(SpectralOperator { n, delta })
    }

    pub fn n(&self) -> SphereDim {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Exact eigenvalue data at degree `k`: the multiplicity `m_k` and the
    /// scalar `phi_k(delta)` by which `T_delta` acts on that block.
    pub fn eigenvalue(&self, k: u32) -> Result<(u64, f64)> {
        Ok((multiplicity(self.n, k)?, phi(self.n, k, self.delta)?.value))
    }
}

/// Convenience constructor mirroring the operator's mathematical name.
pub fn spectral_operator(n: SphereDim, delta: f64) -> Result<SpectralOperator> {
    SpectralOperator::new(n, delta)
}

/// A certified Schatten-norm computation: the reported norm lies in
/// `[partial, (partial^p + tail_bound^p)^{1/p}]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SchattenResult {
    pub p: f64,
    /// Truncated sum to the power `1/p`: a lower bound for the norm.
    pub partial: f64,
    /// Certified bound on the discarded tail, also to the power `1/p`.
    pub tail_bound: f64,
    /// Last degree included in the sum.
    pub k_used: u32,
}

impl SchattenResult {
    pub fn norm_low(&self) -> f64 {
        self.partial
    }

    pub fn norm_high(&self) -> f64 {
        if self.p.is_infinite() {
            self.partial.max(self.tail_bound)
        } else {
            (self.partial.powf(self.p) + self.tail_bound.powf(self.p)).powf(1.0 / self.p)
        }
    }
}

/// Strict convergence threshold `2 + 2/(n-2)` shared by all `S^p` paths.
fn check_p(n: SphereDim, p: f64) -> Result<()> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Argument(format!(
            "Schatten exponent must be positive, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(());
    }
    let threshold = n.schatten_threshold();
    if p <= threshold {
        return Err(Error::Divergence(format!(
            "sum_k m_k |phi_k|^p over S^{{{}-1}} diverges for p <= 2 + 2/(n-2) = {threshold}; \
             got p = {p} (the inequality is strict)",
            n.get()
        )));
    }
    Ok(())
}

fn check_compact(delta: f64) -> Result<()> {
    if delta.abs() == 1.0 {
        return Err(Error::NotCompact(format!(
            "averaging at height {delta} has non-decaying eigenvalues (|phi_k| = 1 for all k)"
        )));
    }
    Ok(())
}

/// Multiplicity ratio `m_k / m_{k-1}` for `k >= 1`, shared by every
/// summation path so truncated sums are bitwise reproducible.
#[inline]
fn multiplicity_ratio(n: u32, k: u32) -> f64 {
    let n = n as f64;
    let k = k as f64;
    (n + k - 3.0) * (n + 2.0 * k - 2.0) / ((n + 2.0 * k - 4.0) * k)
}

/// Stopping policy for the certified sum.
enum StopRule {
    /// Stop when the p-power tail bound drops below this; error at the cap.
    Absolute(f64),
    /// Stop when the p-power tail bound drops below this fraction of the
    /// partial sum; return the best interval achieved at the cap.
    Relative(f64),
}

struct SumOutcome {
    /// `sum_{k=0}^{k_used} m_k |lambda_k|^p`.
    power_sum: f64,
    /// Certified bound on `sum_{k > k_used} m_k |lambda_k|^p`.
    tail_power: f64,
    k_used: u32,
}

/// Core engine: sum `m_k |lambda_k|^p` with tail certificates checked at
/// doubling checkpoints. The eigenvalue iterator starts at `k = 0`.
fn certified_power_sum(
    n: SphereDim,
    p: f64,
    mut lambda: impl Iterator<Item = f64>,
    rule: StopRule,
) -> Result<SumOutcome> {
    let nf = n.get() as f64;
    let lam_exp = n.lambda();
    let s = (nf - 2.0) * (p - 2.0) / 2.0;
    debug_assert!(s > 1.0);
    let envelope_a = nf; // m_k <= n k^{n-2}, sup attained at k = 1

    let lam0 = lambda.next().expect("eigenvalue stream must be infinite");
    let mut sum = lam0.abs().powf(p); // m_0 = 1
    let mut m = 1.0f64;
    let mut c_emp = 0.0f64;
    let mut next_check: u32 = 64;

    for k in 1..=K_CAP {
        let lk = lambda.next().expect("eigenvalue stream must be infinite");
        m *= multiplicity_ratio(n.get(), k);
        if !m.is_finite() {
            return Err(Error::Overflow(format!(
                "multiplicity m_k exceeded floating-point range at k={k} (n={})",
                n.get()
            )));
        }
        c_emp = c_emp.max(lk.abs() * (k as f64).powf(lam_exp));
        sum += m * lk.abs().powf(p);

        if k == next_check || k == K_CAP {
            let tail = envelope_a * (ENVELOPE_SAFETY * c_emp).powf(p) * (k as f64).powf(1.0 - s)
                / (s - 1.0);
            let met = match rule {
                StopRule::Absolute(tol) => tail < tol,
                StopRule::Relative(frac) => tail <= frac * sum || sum == 0.0,
            };
            if met {
                return Ok(SumOutcome {
                    power_sum: sum,
                    tail_power: tail,
                    k_used: k,
                });
            }
            if k == K_CAP {
                return match rule {
                    StopRule::Absolute(tol) => Err(Error::Truncation(format!(
                        "tail bound {tail:.3e} still above tolerance {tol:.3e} after {K_CAP} \
                         terms (n={}, p={p}); the series converges too slowly at this exponent",
                        n.get()
                    ))),
                    StopRule::Relative(_) => Ok(SumOutcome {
                        power_sum: sum,
                        tail_power: tail,
                        k_used: k,
                    }),
                };
            }
            next_check = next_check.saturating_mul(2).min(K_CAP);
        }
    }
    unreachable!("loop exits at the cap checkpoint");
}

/// Supremum norm over the diagonal: iterate until the envelope certifies
/// that no later eigenvalue can exceed the maximum already seen.
fn certified_sup(n: SphereDim, mut lambda: impl Iterator<Item = f64>) -> Result<SumOutcome> {
    let lam_exp = n.lambda();
    let mut best = lambda.next().expect("stream must be infinite").abs();
    let mut c_emp = 0.0f64;
    let mut next_check: u32 = 64;
    for k in 1..=K_CAP {
        let lk = lambda.next().expect("stream must be infinite").abs();
        c_emp = c_emp.max(lk * (k as f64).powf(lam_exp));
        best = best.max(lk);
        if k == next_check || k == K_CAP {
            let tail_sup = ENVELOPE_SAFETY * c_emp * ((k + 1) as f64).powf(-lam_exp);
            if tail_sup <= best {
                return Ok(SumOutcome {
                    power_sum: best,
                    tail_power: 0.0,
                    k_used: k,
                });
            }
            if k == K_CAP {
                return Err(Error::Truncation(format!(
                    "supremum not certified after {K_CAP} eigenvalues (residual bound {tail_sup:.3e})"
                )));
            }
            next_check = next_check.saturating_mul(2).min(K_CAP);
        }
    }
    unreachable!();
}

fn result_from(p: f64, out: SumOutcome) -> SchattenResult {
    SchattenResult {
        p,
        partial: if p.is_infinite() {
            out.power_sum
        } else {
            out.power_sum.powf(1.0 / p)
        },
        tail_bound: if p.is_infinite() {
            out.tail_power
        } else {
            out.tail_power.powf(1.0 / p)
        },
        k_used: out.k_used,
    }
}

/// `||T_delta||_{S^p}` with a certified truncation tail.
///
/// `tol` gates the p-power tail: summation stops once the certified bound on
/// `sum_{k > K} m_k |phi_k|^p` drops below it. `p = infinity` returns the
/// operator norm (1, attained at the constants block `k = 0`).
pub fn schatten_norm(op: SpectralOperator, p: f64, tol: f64) -> Result<SchattenResult> {
    check_compact(op.delta)?;
    check_p(op.n, p)?;
    let series = PhiSeries::new(op.n, op.delta)?;
    if p.is_infinite() {
        return Ok(result_from(p, certified_sup(op.n, series)?));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tail tolerance must be positive, got {tol}"
        )));
    }
    Ok(result_from(
        p,
        certified_power_sum(op.n, p, series, StopRule::Absolute(tol))?,
    ))
}

/// Eigenvalue stream of the difference operator `T_{delta} - T_{delta2}`:
/// `phi_k(delta) - phi_k(delta2)`, which vanishes at `k = 0`.
struct DiffSeries {
    a: PhiSeries,
    b: PhiSeries,
}

impl Iterator for DiffSeries {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.a.next().unwrap() - self.b.next().unwrap())
    }
}

fn diff_series(n: SphereDim, delta: f64, delta2: f64) -> Result<DiffSeries> {
    Ok(DiffSeries {
        a: PhiSeries::new(n, delta)?,
        b: PhiSeries::new(n, delta2)?,
    })
}

/// `||T_delta - T_delta2||_{S^p}` with a certified truncation tail; the
/// constants block cancels exactly, so this measures the oscillatory part.
pub fn schatten_diff(
    n: SphereDim,
    delta: f64,
    delta2: f64,
    p: f64,
    tol: f64,
) -> Result<SchattenResult> {
    check_compact(delta)?;
    check_compact(delta2)?;
    check_p(n, p)?;
    let series = diff_series(n, delta, delta2)?;
    if p.is_infinite() {
        return Ok(result_from(p, certified_sup(n, series)?));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tail tolerance must be positive, got {tol}"
        )));
    }
    Ok(result_from(
        p,
        certified_power_sum(n, p, series, StopRule::Absolute(tol))?,
    ))
}

/// Difference norm with a relative stopping rule that never errors at the
/// cap: used where many norms feed a fit and the exponent may sit close to
/// the convergence threshold, where absolute tails are unreachable.
fn schatten_diff_adaptive(n: SphereDim, delta: f64, delta2: f64, p: f64) -> Result<SchattenResult> {
    check_compact(delta)?;
    check_compact(delta2)?;
    check_p(n, p)?;
    let series = diff_series(n, delta, delta2)?;
    Ok(result_from(
        p,
        certified_power_sum(n, p, series, StopRule::Relative(1e-3))?,
    ))
}

/// Direct truncated power sum `sum_{k=0}^{k_max} m_k |phi_k(delta)|^p` with
/// no convergence precondition — the raw object behind both the norm
/// computations (identical arithmetic) and divergence demonstrations at and
/// below the threshold exponent.
pub fn raw_power_sum(n: SphereDim, delta: f64, p: f64, k_max: u32) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p.is_infinite() {
        return Err(Error::Argument(format!(
            "raw power sums require a finite positive exponent, got {p}"
        )));
    }
    let series = PhiSeries::new(n, delta)?;
    Ok(raw_sum_over(n, p, series, k_max))
}

/// Raw power sum of the difference eigenvalues, same contract as
/// [`raw_power_sum`].
pub fn raw_diff_power_sum(
    n: SphereDim,
    delta: f64,
    delta2: f64,
    p: f64,
    k_max: u32,
) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p.is_infinite() {
        return Err(Error::Argument(format!(
            "raw power sums require a finite positive exponent, got {p}"
        )));
    }
    let series = diff_series(n, delta, delta2)?;
    Ok(raw_sum_over(n, p, series, k_max))
}

fn raw_sum_over(n: SphereDim, p: f64, mut lambda: impl Iterator<Item = f64>, k_max: u32) -> f64 {
    let mut sum = lambda.next().unwrap().abs().powf(p);
    let mut m = 1.0f64;
    for k in 1..=k_max {
        m *= multiplicity_ratio(n.get(), k);
        sum += m * lambda.next().unwrap().abs().powf(p);
    }
    sum
}

/// Fitted Holder data for `||T_0 - T_delta||_{S^p} <= C_p |delta|^{alpha_p}`
/// on a grid in `[-1/2, 1/2]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderConstants {
    pub n: u32,
    pub p: f64,
    pub c_p: f64,
    pub alpha_p: f64,
    /// Grid points actually used by the fit (nonzero, `1e-3 <= |d| <= 1/2`).
    pub grid: Vec<f64>,
    /// `max_d (||T_0 - T_d||_{S^p} - C_p |d|^{alpha_p})`; nonpositive once
    /// `C_p` has been inflated to cover the grid.
    pub max_violation: f64,
}

impl HolderConstants {
    /// Assemble constants directly (e.g. supplied on a command line) without
    /// refitting; validates the normalization `C_p >= 2`, `alpha_p in (0,1)`.
    pub fn from_parts(n: SphereDim, p: f64, c_p: f64, alpha_p: f64) -> Result<Self> {
        if !(c_p >= 2.0) {
            return Err(Error::Argument(format!(
                "Holder constant must satisfy C_p >= 2, got {c_p}"
            )));
        }
        if !(alpha_p > 0.0 && alpha_p < 1.0) {
            return Err(Error::Argument(format!(
                "Holder exponent must lie in (0,1), got {alpha_p}"
            )));
        }
        Ok(HolderConstants {
            n: n.get(),
            p,
            c_p,
            alpha_p,
            grid: Vec::new(),
            max_violation: 0.0,
        })
    }
}

/// Fit `(C_p, alpha_p)` for `||T_0 - T_delta||_{S^p}` on the given grid.
///
/// A log-log least-squares fit of the certified upper norms against
/// `|delta|` produces the exponent (clamped into `(0,1)`); the constant is
/// then inflated until the bound holds at every grid point, and clamped to
/// the normalization `C_p >= 2`. Points with `|delta| < 1e-3` are dropped
/// for log conditioning; points outside `[-1/2, 1/2]` are rejected.
pub fn holder_fit(n: SphereDim, p: f64, delta_grid: &[f64]) -> Result<HolderConstants> {
    check_p(n, p)?;
    if p.is_infinite() {
        return Err(Error::Argument(
            "Holder fit requires a finite Schatten exponent".into(),
        ));
    }
    let mut grid = Vec::new();
    for &d in delta_grid {
        if !d.is_finite() || d.abs() > 0.5 {
            return Err(Error::Domain(format!(
                "Holder grid points must lie in [-1/2, 1/2], got {d}"
            )));
        }
        if d.abs() >= 1e-3 {
            grid.push(d);
        }
    }
    if grid.is_empty() {
        return Err(Error::Argument(
            "Holder grid contains no usable points (need 1e-3 <= |delta| <= 1/2)".into(),
        ));
    }

    let norms: Vec<f64> = grid
        .iter()
        .map(|&d| schatten_diff_adaptive(n, 0.0, d, p).map(|r| r.norm_high()))
        .collect::<Result<_>>()?;

    // Least squares on log ||T_0 - T_d|| = log C + alpha log |d|.
    let logs: Vec<(f64, f64)> = grid
        .iter()
        .zip(&norms)
        .map(|(&d, &v)| (d.abs().ln(), v.ln()))
        .collect();
    let m = logs.len() as f64;
    let sx: f64 = logs.iter().map(|t| t.0).sum();
    let sy: f64 = logs.iter().map(|t| t.1).sum();
    let sxx: f64 = logs.iter().map(|t| t.0 * t.0).sum();
    let sxy: f64 = logs.iter().map(|t| t.0 * t.1).sum();
    let denom = m * sxx - sx * sx;
    let slope = if denom.abs() < 1e-30 {
        0.5 // degenerate single-|delta| grid: any admissible exponent works
    } else {
        (m * sxy - sx * sy) / denom
    };
    let alpha_p = slope.clamp(1e-6, 1.0 - 1e-6);

    let mut c_p: f64 = 2.0;
    for (&d, &v) in grid.iter().zip(&norms) {
        c_p = c_p.max(v / d.abs().powf(alpha_p));
    }
    let max_violation = grid
        .iter()
        .zip(&norms)
        .map(|(&d, &v)| v - c_p * d.abs().powf(alpha_p))
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(HolderConstants {
        n: n.get(),
        p,
        c_p,
        alpha_p,
        grid,
        max_violation,
    })
}

/// Finitely supported coefficient sequence of a spherical multiplier
/// `phi(g) = sum_k c_k m_k phi_k(g_11)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplierCoefficients {
    pub n: u32,
    /// `coefficients[k] = c_k`; the vector length is the support bound.
    pub coefficients: Vec<f64>,
}

impl MultiplierCoefficients {
    pub fn new(n: SphereDim, coefficients: Vec<f64>) -> Self {
        MultiplierCoefficients {
            n: n.get(),
            coefficients,
        }
    }

    fn dim(&self) -> SphereDim {
        SphereDim::new(self.n).expect("validated at construction")
    }
}

/// Dual coefficient norm `(sum_k m_k |c_k|^q)^{1/q}` with `q = p/(p-1)`,
/// the lower bound a multiplier's coefficients impose on its norm.
pub fn multiplier_coeff_norm(mc: &MultiplierCoefficients, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Argument(format!(
            "conjugate exponent q = p/(p-1) requires p > 1, got {p}"
        )));
    }
    let q = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    let n = mc.dim();
    let mut sum = 0.0f64;
    for (k, &c) in mc.coefficients.iter().enumerate() {
        if c != 0.0 {
            sum += multiplicity(n, k as u32)? as f64 * c.abs().powf(q);
        }
    }
    Ok(sum.powf(1.0 / q))
}

/// Result of the duality estimate `|phi(g) - phi(g')| <=`
/// `(coefficient norm) * ||T_{g11} - T_{g11'}||_{S^p}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OscillationCheck {
    pub bound: f64,
    pub actual: f64,
}

/// Evaluate both sides of the multiplier oscillation estimate and return
/// them; errors if the actual oscillation exceeds the bound (it cannot, by
/// the Holder inequality for the measure `m_k`).
pub fn oscillation_bound(
    mc: &MultiplierCoefficients,
    g11: f64,
    g11p: f64,
    p: f64,
) -> Result<OscillationCheck> {
    let n = mc.dim();
    if g11.abs() >= 1.0 || g11p.abs() >= 1.0 {
        return Err(Error::Domain(
            "matrix entries must lie in the open interval (-1, 1)".into(),
        ));
    }
    let coeff_norm = multiplier_coeff_norm(mc, p)?;
    let diff = if p.is_infinite() {
        schatten_diff(n, g11, g11p, p, 1.0)?
    } else {
        schatten_diff_adaptive(n, g11, g11p, p)?
    };
    let bound = coeff_norm * diff.norm_high();

    let mut actual = 0.0f64;
    let phis_a: Vec<f64> = PhiSeries::new(n, g11)?
        .take(mc.coefficients.len())
        .collect();
    let phis_b: Vec<f64> = PhiSeries::new(n, g11p)?
        .take(mc.coefficients.len())
        .collect();
    for (k, &c) in mc.coefficients.iter().enumerate() {
        if c != 0.0 {
            actual += c * multiplicity(n, k as u32)? as f64 * (phis_a[k] - phis_b[k]);
        }
    }
    let actual = actual.abs();
    if actual > bound * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::Internal(format!(
            "duality estimate violated: oscillation {actual} exceeds bound {bound}"
        )));
    }
    Ok(OscillationCheck { bound, actual })
}
