//! Dense matrix oracle for the circle-averaging operator on the 2-sphere.
//!
//! Everything else in this crate treats the averaging operator through its
//! known diagonalization. This module does the opposite: it assembles the
//! operator's matrix in an explicit orthonormal basis of real spherical
//! harmonics up to a band limit `L`, by brute numerical averaging over the
//! circles `{y : <x, y> = delta}`, and returns its eigenvalues. Those must
//! then cluster at the Legendre values `P_k(delta)` with multiplicities
//! `2k+1` — an end-to-end check of the diagonal model that shares no code
//! path with the recurrence machinery.
//!
//! All quadratures are chosen exact for the polynomial degrees involved:
//! Gauss-Legendre in `cos(theta)`, equispaced trapezoid in the azimuth, and
//! an `N`-point equispaced average over each circle. The circle restriction
//! of a degree-`k` harmonic is a trigonometric polynomial of degree `k`, so
//! the average is exact once `N > L`; smaller `N` aliases high harmonics
//! onto low ones, which the off-block energy check flags as insufficient
//! sampling.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gegenbauer::SphereDim;
use crate::quad::GaussLegendre;

/// Band limits above this would make the dense basis needlessly large.
pub const MAX_BAND_LIMIT: u32 = 30;

/// Off-block Frobenius energy above this flags aliasing from an
/// insufficient circle sample count.
const OFF_BLOCK_TOL: f64 = 1e-8;

/// Dimension of the band-limited harmonic space: `(L+1)^2`.
pub fn sphere_basis_dim(band_limit: u32) -> usize {
    ((band_limit + 1) * (band_limit + 1)) as usize
}

/// Evaluate the full orthonormal basis (probability normalization) at the
/// point with polar cosine `x` and azimuth `az`, into `out[k^2 + k + m]`.
///
/// The polar factors are fully normalized associated Legendre functions
/// `Q_k^m` built by the stable diagonal-then-upward recurrences
/// `Q_m^m = sqrt((2m+1)/(2m)) s Q_{m-1}^{m-1}` (with `s = sin(theta)`),
/// `Q_{m+1}^m = sqrt(2m+3) x Q_m^m`, and for `k >= m+2`
/// `Q_k^m = a_k^m x Q_{k-1}^m - b_k^m Q_{k-2}^m`.
fn eval_basis(l: u32, x: f64, az: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), sphere_basis_dim(l));
    let s = (1.0 - x * x).max(0.0).sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut qmm = 1.0f64; // Q_0^0
    for m in 0..=l {
        let mf = m as f64;
        if m > 0 {
            qmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        let (cm, sm) = if m == 0 {
            (1.0, 0.0)
        } else {
            (sqrt2 * (mf * az).cos(), sqrt2 * (mf * az).sin())
        };
        let mut write = |k: u32, q: f64| {
            let base = (k * k + k) as usize;
            out[base + m as usize] = q * cm;
            if m > 0 {
                out[base - m as usize] = q * sm;
            }
        };
        write(m, qmm);
        if m < l {
            let mut q_prev2 = qmm;
            let mut q_prev = (2.0 * mf + 3.0).sqrt() * x * qmm;
            write(m + 1, q_prev);
            for k in m + 2..=l {
                let kf = k as f64;
                let a = ((2.0 * kf + 1.0) * (2.0 * kf - 1.0) / ((kf - mf) * (kf + mf))).sqrt();
                let b = ((2.0 * kf + 1.0) * (kf - 1.0 - mf) * (kf - 1.0 + mf)
                    / ((2.0 * kf - 3.0) * (kf - mf) * (kf + mf)))
                    .sqrt();
                let q = a * x * q_prev - b * q_prev2;
                write(k, q);
                q_prev2 = q_prev;
                q_prev = q;
            }
        }
    }
}

/// Outer quadrature over the sphere (probability measure): Gauss-Legendre
/// in the polar cosine times an equispaced azimuth grid, exact for the
/// degree `2L` integrands that arise in the Gram and averaging matrices.
struct SphereQuadrature {
    /// `(cos(theta), azimuth, weight)` triples; weights sum to 1.
    points: Vec<(f64, f64, f64)>,
}

impl SphereQuadrature {
    fn new(l: u32) -> Self {
        let rule = GaussLegendre::cached((2 * l + 4) as usize);
        let n_az = (4 * l + 8) as usize;
        let mut points = Vec::with_capacity(rule.nodes.len() * n_az);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            for j in 0..n_az {
                let az = 2.0 * std::f64::consts::PI * j as f64 / n_az as f64;
                points.push((t, az, w / 2.0 / n_az as f64));
            }
        }
        SphereQuadrature { points }
    }
}

fn unit_vector(x: f64, az: f64) -> [f64; 3] {
    let s = (1.0 - x * x).max(0.0).sqrt();
    [s * az.cos(), s * az.sin(), x]
}

/// Average the basis over the circle at height `delta` around the point
/// `(x, az)`, using `n_samples` equispaced points, accumulating into `out`.
fn circle_average_basis(l: u32, x: f64, az: f64, delta: f64, n_samples: u32, out: &mut [f64]) {
    let p = unit_vector(x, az);
    let s = (1.0 - x * x).max(0.0).sqrt();
    // Orthonormal tangent frame at p (the polar/azimuthal directions).
    let e_theta = [x * az.cos(), x * az.sin(), -s];
    let e_phi = [-az.sin(), az.cos(), 0.0];
    let r = (1.0 - delta * delta).max(0.0).sqrt();
    out.fill(0.0);
    let mut scratch = vec![0.0; out.len()];
    for j in 0..n_samples {
        let psi = 2.0 * std::f64::consts::PI * j as f64 / n_samples as f64;
        let (cp, sp) = (psi.cos(), psi.sin());
        let y = [
            delta * p[0] + r * (cp * e_theta[0] + sp * e_phi[0]),
            delta * p[1] + r * (cp * e_theta[1] + sp * e_phi[1]),
            delta * p[2] + r * (cp * e_theta[2] + sp * e_phi[2]),
        ];
        let yx = y[2].clamp(-1.0, 1.0);
        let yaz = y[1].atan2(y[0]);
        eval_basis(l, yx, yaz, &mut scratch);
        for (o, v) in out.iter_mut().zip(&scratch) {
            *o += v;
        }
    }
    let inv = 1.0 / n_samples as f64;
    for o in out.iter_mut() {
        *o *= inv;
    }
}

/// Assemble the matrix of the circle-averaging operator in the harmonic
/// basis: `M[a][b] = <Z_a, T_delta Z_b>` by exact outer quadrature of the
/// numerically averaged basis.
fn averaging_matrix(l: u32, delta: f64, n_samples: u32) -> DMatrix<f64> {
    let dim = sphere_basis_dim(l);
    let quad = SphereQuadrature::new(l);
    let npts = quad.points.len();
    let mut g_weighted = DMatrix::zeros(npts, dim);
    let mut h = DMatrix::zeros(npts, dim);
    let mut row = vec![0.0; dim];
    for (i, &(x, az, w)) in quad.points.iter().enumerate() {
        eval_basis(l, x, az, &mut row);
        for (j, &v) in row.iter().enumerate() {
            g_weighted[(i, j)] = w * v;
        }
        circle_average_basis(l, x, az, delta, n_samples, &mut row);
        for (j, &v) in row.iter().enumerate() {
            h[(i, j)] = v;
        }
    }
    g_weighted.transpose() * h
}

/// Gram matrix of the basis under the same outer quadrature; must be the
/// identity to rounding error. Used by tests to certify the basis.
#[cfg(test)]
fn gram_matrix(l: u32) -> DMatrix<f64> {
    let dim = sphere_basis_dim(l);
    let quad = SphereQuadrature::new(l);
    let npts = quad.points.len();
    let mut g_weighted = DMatrix::zeros(npts, dim);
    let mut g = DMatrix::zeros(npts, dim);
    let mut row = vec![0.0; dim];
    for (i, &(x, az, w)) in quad.points.iter().enumerate() {
        eval_basis(l, x, az, &mut row);
        for (j, &v) in row.iter().enumerate() {
            g_weighted[(i, j)] = w * v;
            g[(i, j)] = v;
        }
    }
    g_weighted.transpose() * g
}

/// Frobenius norm of the part of `M` that the diagonal model says must
/// vanish: everything outside scalar multiples of the identity on each
/// degree block.
fn off_block_energy(m: &DMatrix<f64>, l: u32) -> f64 {
    let mut residual = m.clone();
    for k in 0..=l {
        let start = (k * k) as usize;
        let len = (2 * k + 1) as usize;
        let mut trace = 0.0;
        for i in 0..len {
            trace += m[(start + i, start + i)];
        }
        let mean = trace / len as f64;
        for i in 0..len {
            residual[(start + i, start + i)] -= mean;
        }
    }
    residual.norm()
}

/// Eigenvalues of the dense averaging matrix, sorted descending.
///
/// Only the 2-sphere (`n = 3`) is materialized; the band limit is capped at
/// [`MAX_BAND_LIMIT`]. `n_samples` is the equispaced circle sample count;
/// any `n_samples > band_limit` integrates the band-limited restrictions
/// exactly, and smaller counts are rejected through the off-block energy
/// they leak, not by fiat — aliasing is detected, not assumed.
pub fn dense_sphere_oracle(
    n: SphereDim,
    band_limit: u32,
    delta: f64,
    n_samples: u32,
) -> Result<Vec<f64>> {
    if n.get() != 3 {
        return Err(Error::Unsupported(format!(
            "dense averaging matrices are only materialized on the 2-sphere, got n = {}",
            n.get()
        )));
    }
    if band_limit > MAX_BAND_LIMIT {
        return Err(Error::Argument(format!(
            "band limit {band_limit} exceeds the dense-matrix cap {MAX_BAND_LIMIT}"
        )));
    }
    if !delta.is_finite() || delta.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "averaging height must lie in [-1, 1], got {delta}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::Argument(
            "circle sample count must be positive".into(),
        ));
    }
    let m = averaging_matrix(band_limit, delta, n_samples);
    let energy = off_block_energy(&m, band_limit);
    if energy > OFF_BLOCK_TOL {
        return Err(Error::InsufficientSampling(format!(
            "off-block energy {energy:.3e} exceeds {OFF_BLOCK_TOL:.0e}: {n_samples} circle \
             samples alias harmonics above the sample rate back into the band (need more than \
             {band_limit} samples for band limit {band_limit})"
        )));
    }
    let sym = (&m + m.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eigs)
}

/// Group a sorted (descending) eigenvalue list into clusters whose members
/// lie within `tol` of the cluster's running mean; returns
/// `(center, count)` pairs.
pub fn eigenvalue_clusters(sorted_eigs: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for &e in sorted_eigs {
        match clusters.last_mut() {
            Some((center, count)) if (e - *center).abs() <= tol => {
                *center = (*center * *count as f64 + e) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => clusters.push((e, 1)),
        }
    }
    clusters
}
