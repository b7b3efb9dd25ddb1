//! Singular-value bookkeeping along Weyl-chamber paths.
//!
//! The decay certificate for spherical multipliers on a high-rank group is
//! assembled from three elementary pieces, all realized here:
//!
//! 1. the 2x2 KAK identity: `diag(e^{s/2}, e^{t/2}) R(theta)
//!    diag(e^{s/2}, e^{t/2})` has log-singular values `(x, y)` with
//!    `x + y = s + t` and `sinh((x-y)/2) = sinh((s-t)/2) |cos theta|`, so a
//!    target pair `(v, u)` on the same trace line is reached by an explicit
//!    rotation angle whose cosine is certified small:
//!    `|cos theta| <= e^{t-u}`;
//! 2. the per-step oscillation bound `2(n-2) C_p e^{-alpha_p (u-t-delta)}`
//!    driven by fitted Holder constants;
//! 3. the telescoping schedule `v_k = min(s, (1 + k/(2n-4)) t)` whose step
//!    bounds sum to the closed-form geometric certificate
//!    `eps_p(t) = 4(n-2) C_p e^{-alpha_p t/2} / (1 - e^{-alpha_p t/(2n-4)})`.
//!
//! All functions are pure scalar arithmetic and safe to call from any
//! thread.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::schatten::HolderConstants;

/// Diagonal matrix `D(v,u,t) = diag(e^v x(n-2), e^u, e^t x(n-2))` of size
/// `2n-3`, the generic point of the Weyl chamber walk.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeylDiagonal {
    pub n: u32,
    pub v: f64,
    pub u: f64,
    pub t: f64,
}

/// Build `D(v,u,t)`, enforcing the unit-determinant trace constraint
/// `t + u/(n-2) + v = 0`.
pub fn weyl_diagonal(n: u32, v: f64, u: f64, t: f64) -> Result<WeylDiagonal> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    let residual = t + u / (n as f64 - 2.0) + v;
    let scale = 1.0f64.max(v.abs() + u.abs() + t.abs());
    if !(residual.abs() <= 1e-12 * scale) {
        return Err(Error::Argument(format!(
            "trace constraint t + u/(n-2) + v = 0 violated by {residual:.3e} \
             (v={v}, u={u}, t={t}, n={n})"
        )));
    }
    Ok(WeylDiagonal { n, v, u, t })
}

impl WeylDiagonal {
    /// Matrix dimension `2n-3`.
    pub fn size(&self) -> usize {
        (2 * self.n - 3) as usize
    }

    /// The realized diagonal matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let block = (self.n - 2) as usize;
        let mut d = DMatrix::zeros(self.size(), self.size());
        for i in 0..block {
            d[(i, i)] = self.v.exp();
        }
        d[(block, block)] = self.u.exp();
        for i in 0..block {
            d[(block + 1 + i, block + 1 + i)] = self.t.exp();
        }
        d
    }
}

/// `asinh(sinh(h) * c)` for `h >= 0`, `c in [0, 1]`, stable when `sinh(h)`
/// would overflow: there `asinh(z) ~ ln(2z)`, so the answer is `h + ln c`.
fn log_singular_gap(h: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if h <= 700.0 {
        (h.sinh() * c).asinh()
    } else {
        (h + c.ln()).max(0.0)
    }
}

/// Log-singular values `(x, y)`, `x >= y`, of
/// `diag(e^{s/2}, e^{t/2}) R(theta) diag(e^{s/2}, e^{t/2})`.
///
/// Factoring `e^{(s+t)/2}` out of the product leaves a unit-determinant
/// matrix with Frobenius norm `2 cosh(2g)` where
/// `sinh(g) = sinh((s-t)/2) |cos theta|`; the singular values are then
/// `e^{(s+t)/2 +- g}`.
pub fn kak2_forward(s: f64, t: f64, theta: f64) -> Result<(f64, f64)> {
    if !(s >= t) {
        return Err(Error::Argument(format!("need s >= t, got s={s}, t={t}")));
    }
    let m = 0.5 * (s + t);
    let h = 0.5 * (s - t);
    let g = log_singular_gap(h, theta.cos().abs());
    Ok((m + g, m - g))
}

/// Rotation angle `theta in [0, pi/2]` with
/// `kak2_forward(s, t, theta) = (v, u)`.
///
/// Requires `t <= u <= v <= s` (up to floating-point slack) and
/// `u + v = s + t`. The closed form is
/// `cos theta = sinh((v-u)/2) / sinh((s-t)/2)`, equivalently
/// `cos^2 theta = (e^{2v} + e^{2u} - 2e^{s+t}) / (e^{2s} + e^{2t} -
/// 2e^{s+t})` on the trace line, and the returned angle always satisfies
/// the certificate `|cos theta| <= e^{t-u}`:
/// `sinh(a - d) <= e^{-d} sinh(a)` for `a, d >= 0`.
pub fn kak2_solve(v: f64, u: f64, s: f64, t: f64) -> Result<f64> {
    let scale = 1.0f64.max(s.abs() + t.abs() + u.abs() + v.abs());
    if (u + v - (s + t)).abs() > 1e-9 * scale {
        return Err(Error::Argument(format!(
            "targets must preserve the trace: u+v = {} but s+t = {}",
            u + v,
            s + t
        )));
    }
    let slack = 1e-8 * scale;
    if !(t <= u + slack && u <= v + slack && v <= s + slack) {
        return Err(Error::Argument(format!(
            "need t <= u <= v <= s, got t={t}, u={u}, v={v}, s={s}"
        )));
    }
    if s - t <= 0.0 {
        // Degenerate chamber: the product is a multiple of a rotation and
        // every angle reproduces (v, u) = (s, t).
        return Ok(0.0);
    }
    let ratio = (0.5 * (v - u).max(0.0)).sinh() / (0.5 * (s - t)).sinh();
    if ratio > 1.0 + 1e-12 {
        // Only reachable by exhausting the preconditions' floating-point
        // slack; an exact target on the trace line always has ratio <= 1.
        return Err(Error::Infeasible(format!(
            "no rotation reaches (v={v}, u={u}) from (s={s}, t={t}): cos theta would be {ratio}"
        )));
    }
    Ok(ratio.min(1.0).acos())
}

/// One-step oscillation bound `2(n-2) C_p e^{-alpha_p (u - t - delta)}`.
///
/// With `dual = true` the same arithmetic expresses the Cartan-dual bound,
/// where the roles of the chamber coordinates flip and the caller passes
/// the `(v, u)` gap instead of `(u, t)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepBound {
    pub n: u32,
    pub c_p: f64,
    pub alpha_p: f64,
    pub u: f64,
    pub t: f64,
    pub delta: f64,
    pub dual: bool,
    pub value: f64,
}

pub fn step_bound(
    n: u32,
    holder: &HolderConstants,
    u: f64,
    t: f64,
    delta: f64,
    dual: bool,
) -> Result<StepBound> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if !(delta > 0.0 && delta < u - t) {
        return Err(Error::Argument(format!(
            "need 0 < delta < u - t, got delta={delta}, u-t={}",
            u - t
        )));
    }
    let value = 2.0 * (n as f64 - 2.0) * holder.c_p * (-holder.alpha_p * (u - t - delta)).exp();
    Ok(StepBound {
        n,
        c_p: holder.c_p,
        alpha_p: holder.alpha_p,
        u,
        t,
        delta,
        dual,
        value,
    })
}

/// The interpolation levels `v_k = min(s, (1 + k/(2n-4)) t)` from `t` up to
/// `s`, ending at the first index that reaches `s`.
#[derive(Debug, Clone, Serialize)]
pub struct PathSchedule {
    pub n: u32,
    pub t: f64,
    pub s: f64,
    pub levels: Vec<f64>,
    /// Index of the first level equal to `s` (= number of steps taken).
    pub n_steps: usize,
}

pub fn path_schedule(n: u32, t: f64, s: f64) -> Result<PathSchedule> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if !(t > 0.0) {
        return Err(Error::Argument(format!("need t > 0, got {t}")));
    }
    if !(t <= s) {
        return Err(Error::Argument(format!("need t <= s, got t={t}, s={s}")));
    }
    let denom = (2 * n - 4) as f64;
    let mut levels = Vec::new();
    let mut k = 0usize;
    loop {
        let v = (1.0 + k as f64 / denom) * t;
        if v >= s {
            levels.push(s);
            break;
        }
        levels.push(v);
        k += 1;
        if k > 10_000_000 {
            return Err(Error::Resource(format!(
                "schedule from t={t} to s={s} needs more than 10^7 levels"
            )));
        }
    }
    Ok(PathSchedule {
        n,
        t,
        s,
        n_steps: levels.len() - 1,
        levels,
    })
}

/// Closed-form decay certificate
/// `eps_p(t) = 4(n-2) C_p e^{-alpha_p t/2} / (1 - e^{-alpha_p t/(2n-4)})`,
/// the geometric-series envelope of the telescoped step bounds. Strictly
/// decreasing in `t` on `(0, infinity)`: the log-derivative is
/// `-alpha_p/2 - b e^{-bt}/(1 - e^{-bt}) < 0` with `b = alpha_p/(2n-4)`.
pub fn epsilon_decay(n: u32, holder: &HolderConstants, t: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if !(t > 0.0) {
        return Err(Error::Argument(format!("need t > 0, got {t}")));
    }
    let a = holder.alpha_p;
    let closed = 4.0 * (n as f64 - 2.0) * holder.c_p * (-a * t / 2.0).exp()
        / (1.0 - (-a * t / (2.0 * n as f64 - 4.0)).exp());
    // Cross-check against the series it sums: the telescoped bounds form a
    // geometric series with ratio < 1, so any partial sum must stay below
    // the closed form.
    let raw = telescoped_terms(n, holder, t).take(10_000).sum::<f64>();
    if raw > closed * (1.0 + 1e-12) {
        return Err(Error::Internal(format!(
            "telescoped partial sum {raw} exceeds its closed form {closed}"
        )));
    }
    Ok(closed)
}

/// The individual telescoped step bounds
/// `4(n-2) C_p e^{-alpha_p (1/2 + k/(2n-4)) t}` for `k = 0, 1, 2, ...`.
fn telescoped_terms<'a>(
    n: u32,
    holder: &'a HolderConstants,
    t: f64,
) -> impl Iterator<Item = f64> + 'a {
    let pref = 4.0 * (n as f64 - 2.0) * holder.c_p;
    let a = holder.alpha_p;
    let denom = (2 * n - 4) as f64;
    (0u32..).map(move |k| pref * (-a * (0.5 + k as f64 / denom) * t).exp())
}

/// Finite telescoped estimate along the schedule from level `t` to level
/// `s`: the sum of the first `n_steps` telescoped bounds. Always at most
/// the closed-form certificate `eps_p(t)`.
pub fn telescoped_sum(n: u32, holder: &HolderConstants, t: f64, s: f64) -> Result<f64> {
    let schedule = path_schedule(n, t, s)?;
    Ok(telescoped_terms(n, holder, t)
        .take(schedule.n_steps)
        .sum::<f64>())
}
