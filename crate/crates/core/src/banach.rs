//! Finite-dimensional Banach-space geometry: minimum-volume enclosing
//! ellipsoids for centrally symmetric bodies, the John-ellipsoid
//! certificate for the distance between `l^1_d` and `l^2_d`, and
//! power-law profiles for dimension-dependent embedding constants.
//!
//! * [`mvee_centered`] — the Löwner ellipsoid of a symmetric point set,
//!   by Frank-Wolfe ascent with away steps on the log-det dual.
//! * [`john_check_l1_ball`] — computes the circumscribed and inscribed
//!   balls of the cross-polytope from two independent ellipsoid runs
//!   (the inscribed one through polarity with the cube) and returns the
//!   radius ratio `sqrt(d)`.
//! * [`bm_small`] — the distance from `l^1_d` to Euclidean space for
//!   `d <= 3`, numerically re-verified against the John certificate.
//! * [`BanachProfile`] — validated power-law bounds `C k^beta` with the
//!   doubled variant `2 C k^beta`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default iteration cap for the ellipsoid ascent.
pub const MVEE_ITERATION_CAP: usize = 100_000;

/// A centrally symmetric ellipsoid `{ x : x^T A x <= 1 }` together with
/// the dual certificate produced by the ascent.
#[derive(Debug, Clone, Serialize)]
pub struct CenteredEllipsoid {
    dim: usize,
    /// Row-major `dim x dim` shape matrix `A`.
    shape: Vec<f64>,
    /// Final dual weights, one per input point; the support of the
    /// optimum identifies the contact points.
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// `max_i p_i^T M^{-1} p_i / d` minus 1 at exit: the containment
    /// slack of the KKT conditions.
    pub kkt_excess: f64,
    /// `1 - min_{supported i} p_i^T M^{-1} p_i / d` at exit: the
    /// complementary-slackness defect.
    pub kkt_defect: f64,
}

impl CenteredEllipsoid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major shape matrix of the quadratic form.
    pub fn shape(&self) -> &[f64] {
        &self.shape
    }

    /// `x^T A x` for a point of the right dimension.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Argument(format!(
                "point has dimension {}, ellipsoid has {}",
                x.len(),
                self.dim
            )));
        }
        let d = self.dim;
        let mut acc = 0.0;
        for r in 0..d {
            for c in 0..d {
                acc += x[r] * self.shape[r * d + c] * x[c];
            }
        }
        Ok(acc)
    }

    /// Semi-axis lengths `1/sqrt(lambda_i(A))`, sorted longest first.
    pub fn semi_axes(&self) -> Vec<f64> {
        let a = DMatrix::from_row_slice(self.dim, self.dim, &self.shape);
        let mut axes: Vec<f64> = a
            .symmetric_eigenvalues()
            .iter()
            .map(|&l| 1.0 / l.max(1e-300).sqrt())
            .collect();
        axes.sort_by(|x, y| y.partial_cmp(x).unwrap());
        axes
    }
}

/// Minimum-volume ellipsoid centered at the origin containing the
/// symmetric set `{ +-p_i }`; pass one representative per antipodal
/// pair.
///
/// Maximizes `log det sum_i u_i p_i p_i^T` over probability weights `u`
/// by exact line search along Frank-Wolfe directions, with away steps
/// on the support so convergence is linear. Stops when every point
/// satisfies `p^T M^{-1} p <= d (1 + tol)` and every supported point
/// satisfies `p^T M^{-1} p >= d (1 - tol)`; the shape matrix is then
/// `A = M^{-1} / d`.
pub fn mvee_centered(points: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<CenteredEllipsoid> {
    if points.is_empty() {
        return Err(Error::Argument("ellipsoid needs at least one point".into()));
    }
    let d = points[0].len();
    if d == 0 {
        return Err(Error::Argument(
            "points must have positive dimension".into(),
        ));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Argument(
            "all points must share one dimension".into(),
        ));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Argument("point coordinates must be finite".into()));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Argument(format!(
            "tolerance must be a positive real, got {tol}"
        )));
    }
    let m = points.len();
    let p = DMatrix::from_fn(d, m, |r, c| points[c][r]);
    let mut u = DVector::from_element(m, 1.0 / m as f64);
    let mut kappa = vec![0.0; m];
    for iteration in 0..=max_iter {
        // M(u) = sum_i u_i p_i p_i^T, inverted once per step (d is small).
        let mut mmat = DMatrix::zeros(d, d);
        for i in 0..m {
            let col = p.column(i);
            for r in 0..d {
                for c in 0..d {
                    mmat[(r, c)] += u[i] * col[r] * col[c];
                }
            }
        }
        let minv = match mmat.try_inverse() {
            Some(inv) => inv,
            None if iteration == 0 => {
                return Err(Error::Argument(
                    "points do not span the space; the enclosing ellipsoid is degenerate".into(),
                ))
            }
            None => {
                return Err(Error::Internal(
                    "moment matrix became singular during the ascent".into(),
                ))
            }
        };
        let mk = &minv * &p;
        for (i, k) in kappa.iter_mut().enumerate() {
            *k = p.column(i).dot(&mk.column(i));
        }
        let d_f = d as f64;
        let mut i_plus = 0;
        let mut i_minus = None;
        for i in 0..m {
            if kappa[i] > kappa[i_plus] {
                i_plus = i;
            }
            if u[i] > 1e-15 && i_minus.is_none_or(|j: usize| kappa[i] < kappa[j]) {
                i_minus = Some(i);
            }
        }
        let i_minus = i_minus.expect("weights sum to 1, support is nonempty");
        let excess = kappa[i_plus] / d_f - 1.0;
        let defect = 1.0 - kappa[i_minus] / d_f;
        if excess <= tol && defect <= tol {
            let shape_mat = minv / d_f;
            let mut shape = vec![0.0; d * d];
            for r in 0..d {
                for c in 0..d {
                    shape[r * d + c] = shape_mat[(r, c)];
                }
            }
            return Ok(CenteredEllipsoid {
                dim: d,
                shape,
                weights: u.iter().copied().collect(),
                iterations: iteration,
                kkt_excess: excess,
                kkt_defect: defect,
            });
        }
        if iteration == max_iter {
            break;
        }
        // Exact line search along u -> (1 - beta) u + beta e_i maximizes
        // d log(1 - beta) + log(1 + beta (kappa - 1) / (1 - beta)) at
        // beta = (kappa - d) / (d (kappa - 1)); negative beta is an away
        // step, clamped so the weight cannot go below zero.
        let (idx, beta) = if excess >= defect {
            let k = kappa[i_plus];
            (i_plus, (k - d_f) / (d_f * (k - 1.0)))
        } else {
            let k = kappa[i_minus];
            let unclamped = if k > 1.0 + 1e-12 {
                (k - d_f) / (d_f * (k - 1.0))
            } else {
                f64::NEG_INFINITY
            };
            let floor = -u[i_minus] / (1.0 - u[i_minus]).max(1e-300);
            (i_minus, unclamped.max(floor))
        };
        u *= 1.0 - beta;
        u[idx] += beta;
        // Clean up rounding residue so the support stays exact.
        for w in u.iter_mut() {
            if *w < 1e-15 {
                *w = 0.0;
            }
        }
        let total: f64 = u.iter().sum();
        u /= total;
    }
    Err(Error::Convergence(format!(
        "ellipsoid ascent did not meet tolerance {tol} within {max_iter} iterations"
    )))
}

/// Radii extracted from the John/Löwner certificate for the `l^1_d`
/// unit ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JohnEllipsoidCheck {
    pub dimension: usize,
    /// Radius of the largest Euclidean ball inside the `l^1` ball:
    /// `1/sqrt(d)`.
    pub inscribed_radius: f64,
    /// Radius of the smallest Euclidean ball containing it: 1.
    pub circumscribed_radius: f64,
    /// `circumscribed / inscribed = sqrt(d)`: an upper bound on the
    /// distance from `l^1_d` to Euclidean space, attained for `l^1`.
    pub ratio: f64,
}

/// Computes both John radii of the `l^1_d` ball from enclosing-ellipsoid
/// runs and returns the ratio `sqrt(d)`.
///
/// The circumscribed ball is the Löwner ellipsoid of the cross-polytope
/// vertices. The inscribed ball comes from duality: the polar of the
/// Löwner ellipsoid of the cube `[-1,1]^d` (the polar body of the `l^1`
/// ball) is the maximal ellipsoid inside the `l^1` ball. Cube face
/// centers are added to the corner list so the second run starts away
/// from its optimum and genuinely exercises the ascent. Both ellipsoids
/// must come out as balls — the inputs are symmetric under coordinate
/// permutations and sign flips — and any eccentricity beyond `100 tol`
/// is reported as an internal error.
pub fn john_check_l1_ball(d: usize, tol: f64) -> Result<JohnEllipsoidCheck> {
    if d == 0 {
        return Err(Error::Argument("dimension must be positive".into()));
    }
    if d > 10 {
        return Err(Error::Argument(format!(
            "cube corner enumeration is limited to dimension 10, got {d}"
        )));
    }
    // Cross-polytope vertices, one per antipodal pair.
    let cross: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    let outer = mvee_centered(&cross, tol, MVEE_ITERATION_CAP)?;
    let circumscribed_radius = ball_radius(&outer, tol)?;

    // Cube corners with first coordinate fixed to +1 (antipodal reps),
    // plus the face centers e_i as interior ballast.
    let mut cube: Vec<Vec<f64>> = Vec::with_capacity((1usize << (d - 1)) + d);
    for mask in 0..(1u32 << (d - 1)) {
        let mut corner = vec![1.0; d];
        for (bit, c) in corner.iter_mut().skip(1).enumerate() {
            if mask >> bit & 1 == 1 {
                *c = -1.0;
            }
        }
        cube.push(corner);
    }
    cube.extend(cross.iter().cloned());
    let cube_ellipsoid = mvee_centered(&cube, tol, MVEE_ITERATION_CAP)?;
    let cube_radius = ball_radius(&cube_ellipsoid, tol)?;
    // Polarity: the cube's enclosing ball of radius R dualizes to the
    // ball of radius 1/R inscribed in the l^1 ball.
    let inscribed_radius = 1.0 / cube_radius;

    Ok(JohnEllipsoidCheck {
        dimension: d,
        inscribed_radius,
        circumscribed_radius,
        ratio: circumscribed_radius / inscribed_radius,
    })
}

/// Asserts the ellipsoid is a ball up to `100 tol` relative eccentricity
/// and returns its radius.
fn ball_radius(e: &CenteredEllipsoid, tol: f64) -> Result<f64> {
    let axes = e.semi_axes();
    let longest = axes[0];
    let shortest = axes[axes.len() - 1];
    if (longest - shortest) / longest > 100.0 * tol {
        return Err(Error::Internal(format!(
            "expected a ball by symmetry, got semi-axes between {shortest} and {longest}"
        )));
    }
    Ok(axes.iter().sum::<f64>() / axes.len() as f64)
}

/// Distance from `l^1_d` to `l^2_d` for small `d`: exactly `sqrt(d)`.
///
/// For `d` of 2 or 3 the value is re-derived numerically through
/// [`john_check_l1_ball`] and the measured ratio is returned; a
/// discrepancy beyond `1e-9` from `sqrt(d)` is an internal error.
/// Dimension 1 is isometric. Larger dimensions are not tabulated here.
pub fn bm_small(d: usize) -> Result<f64> {
    match d {
        0 => Err(Error::Argument("dimension must be positive".into())),
        1 => Ok(1.0),
        2 | 3 => {
            let check = john_check_l1_ball(d, 1e-12)?;
            let expected = (d as f64).sqrt();
            if (check.ratio - expected).abs() > 1e-9 {
                return Err(Error::Internal(format!(
                    "John certificate for d = {d} gave ratio {}, expected {expected}",
                    check.ratio
                )));
            }
            Ok(check.ratio)
        }
        _ => Err(Error::Unsupported(format!(
            "exact small-dimension distances are tabulated up to 3, got {d}"
        ))),
    }
}

/// A validated power law `C k^beta` bounding how embedding constants
/// grow with the dimension `k` of the target, together with its doubled
/// companion.
///
/// The exponent is restricted to `[0, 1/2]`: at `beta = 1/2` the bound
/// matches the worst case over all `k`-dimensional targets (compare
/// [`bm_small`], which realizes `sqrt(k)` already for `l^1`), so larger
/// exponents would bound nothing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BanachProfile {
    c: f64,
    beta: f64,
}

impl BanachProfile {
    pub fn new(c: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Argument(format!(
                "profile constant must be a positive real, got {c}"
            )));
        }
        if !(0.0..=0.5).contains(&beta) {
            return Err(Error::Argument(format!(
                "profile exponent must lie in [0, 1/2], got {beta}"
            )));
        }
        Ok(BanachProfile { c, beta })
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn exponent(&self) -> f64 {
        self.beta
    }

    /// `C k^beta`, the distortion budget at dimension `k >= 1`.
    pub fn d_k_bound(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::Argument("dimension index starts at 1".into()));
        }
        Ok(self.c * f64::from(k).powf(self.beta))
    }

    /// `2 C k^beta`: the same budget after the symmetrization step that
    /// recenters an embedding, which at most doubles constants.
    pub fn e_k_bound(&self, k: u32) -> Result<f64> {
        Ok(2.0 * self.d_k_bound(k)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn cross_polytope_ball_is_the_unit_ball() {
        for d in 1..=4 {
            let cross: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                })
                .collect();
            let ell = mvee_centered(&cross, 1e-12, MVEE_ITERATION_CAP).unwrap();
            for axis in ell.semi_axes() {
                assert!((axis - 1.0).abs() <= 1e-10, "d={d}: axis {axis}");
            }
            // Every vertex is a contact point.
            assert!(ell.kkt_excess <= 1e-12 && ell.kkt_defect <= 1e-12);
        }
    }

    #[test]
    fn square_with_face_centers_exercises_the_ascent() {
        // Corners (antipodal reps) plus face centers: the uniform start
        // is not optimal, so the ascent must move mass to the corners.
        let pts = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ];
        let ell = mvee_centered(&pts, 1e-12, MVEE_ITERATION_CAP).unwrap();
        assert!(ell.iterations > 0, "uniform start should not be optimal");
        for axis in ell.semi_axes() {
            assert!((axis - SQRT_2).abs() <= 1e-9, "axis {axis}");
        }
        // Containment with KKT slack, and complementary slackness: the
        // face centers end up with zero weight.
        for (i, p) in pts.iter().enumerate() {
            let q = ell.quadratic_form(p).unwrap();
            assert!(q <= 1.0 + 1e-10, "point {i} sticks out: {q}");
        }
        assert!(
            ell.weights[2] == 0.0 && ell.weights[3] == 0.0,
            "{:?}",
            ell.weights
        );
        assert!((ell.weights[0] - 0.5).abs() <= 1e-9);
        assert!((ell.weights[1] - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn anisotropic_rectangle_has_closed_form_axes() {
        // Corners (2, +-1): the optimum is immediate from the uniform
        // start and the axes are 2 sqrt(2) and sqrt(2).
        let ell = mvee_centered(
            &[vec![2.0, 1.0], vec![2.0, -1.0]],
            1e-12,
            MVEE_ITERATION_CAP,
        )
        .unwrap();
        let axes = ell.semi_axes();
        assert!((axes[0] - 2.0 * SQRT_2).abs() <= 1e-9, "{axes:?}");
        assert!((axes[1] - SQRT_2).abs() <= 1e-9, "{axes:?}");
        let q = ell.quadratic_form(&[2.0, 1.0]).unwrap();
        assert!((q - 1.0).abs() <= 1e-10, "corner not on the boundary: {q}");
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert_eq!(mvee_centered(&[], 1e-9, 10).unwrap_err().kind(), "argument");
        // Collinear representatives cannot span the plane.
        let collinear = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![-0.5, -1.0]];
        assert_eq!(
            mvee_centered(&collinear, 1e-9, 1000).unwrap_err().kind(),
            "argument"
        );
        let ragged = vec![vec![1.0, 0.0], vec![1.0]];
        assert_eq!(
            mvee_centered(&ragged, 1e-9, 10).unwrap_err().kind(),
            "argument"
        );
        let nan = vec![vec![f64::NAN, 0.0], vec![0.0, 1.0]];
        assert_eq!(
            mvee_centered(&nan, 1e-9, 10).unwrap_err().kind(),
            "argument"
        );
        assert_eq!(
            mvee_centered(&[vec![1.0]], 0.0, 10).unwrap_err().kind(),
            "argument"
        );
    }

    #[test]
    fn iteration_cap_reports_convergence_failure() {
        let pts = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ];
        assert_eq!(
            mvee_centered(&pts, 1e-12, 1).unwrap_err().kind(),
            "convergence"
        );
    }

    #[test]
    fn john_radii_for_the_plane_and_space() {
        let chk2 = john_check_l1_ball(2, 1e-12).unwrap();
        assert!((chk2.circumscribed_radius - 1.0).abs() <= 1e-9);
        assert!((chk2.inscribed_radius - 1.0 / SQRT_2).abs() <= 1e-9);
        assert!((chk2.ratio - SQRT_2).abs() <= 1e-9);

        let chk3 = john_check_l1_ball(3, 1e-12).unwrap();
        let sqrt3 = 3.0f64.sqrt();
        assert!((chk3.circumscribed_radius - 1.0).abs() <= 1e-9);
        assert!((chk3.inscribed_radius - 1.0 / sqrt3).abs() <= 1e-9);
        assert!((chk3.ratio - sqrt3).abs() <= 1e-9);

        assert_eq!(john_check_l1_ball(0, 1e-9).unwrap_err().kind(), "argument");
        assert_eq!(john_check_l1_ball(11, 1e-9).unwrap_err().kind(), "argument");
    }

    #[test]
    fn small_dimension_distance_table() {
        assert_eq!(bm_small(1).unwrap(), 1.0);
        assert!((bm_small(2).unwrap() - SQRT_2).abs() <= 1e-9);
        assert!((bm_small(3).unwrap() - 3.0f64.sqrt()).abs() <= 1e-9);
        assert_eq!(bm_small(0).unwrap_err().kind(), "argument");
        assert_eq!(bm_small(4).unwrap_err().kind(), "unsupported");
    }

    #[test]
    fn profile_bounds_and_validation() {
        let p = BanachProfile::new(2.5, 0.3).unwrap();
        assert_eq!(p.d_k_bound(1).unwrap(), 2.5);
        let d8 = p.d_k_bound(8).unwrap();
        assert!((d8 - 2.5 * 8.0f64.powf(0.3)).abs() <= 1e-12);
        assert_eq!(p.e_k_bound(8).unwrap(), 2.0 * d8);
        // Monotone in k.
        let mut prev = 0.0;
        for k in 1..=20 {
            let v = p.d_k_bound(k).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(p.d_k_bound(0).unwrap_err().kind(), "argument");
        assert_eq!(BanachProfile::new(0.0, 0.3).unwrap_err().kind(), "argument");
        assert_eq!(
            BanachProfile::new(-1.0, 0.3).unwrap_err().kind(),
            "argument"
        );
        assert_eq!(BanachProfile::new(1.0, 0.6).unwrap_err().kind(), "argument");
        assert_eq!(
            BanachProfile::new(1.0, -0.1).unwrap_err().kind(),
            "argument"
        );
        assert_eq!(
            BanachProfile::new(f64::NAN, 0.3).unwrap_err().kind(),
            "argument"
        );
        // Constant profiles are allowed: beta = 0 bounds by C everywhere.
        let flat = BanachProfile::new(3.0, 0.0).unwrap();
        assert_eq!(flat.d_k_bound(100).unwrap(), 3.0);
    }
}
