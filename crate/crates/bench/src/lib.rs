//! Shared fixtures for the criterion benchmarks in `benches/`.

use hirank_core::{cayley_build, enumerate_group, CayleyGraph, GeneratingSet, SphereDim};

/// Cayley graph of SL(n, Z/qZ) on the elementary generators.
pub fn elementary_cayley(n: usize, q: u32) -> CayleyGraph {
    let gens = GeneratingSet::elementary(n, q).expect("fixture parameters are valid");
    let table = enumerate_group(&gens, None).expect("fixture groups fit the cap");
    cayley_build(&table, &gens).expect("generators come from the enumerated table")
}

/// Ambient dimension wrapper for fixture parameters known to be `>= 3`.
pub fn dim(n: u32) -> SphereDim {
    SphereDim::new(n).expect("fixture dimensions are at least 3")
}

/// Corners of the cube `[-1, 1]^d` together with the face centers; the
/// minimum-volume ellipsoid of this cloud is the ball of radius `sqrt(d)`,
/// reached only after genuine ascent iterations.
pub fn cube_corners_with_face_centers(d: usize) -> Vec<Vec<f64>> {
    let mut points = Vec::new();
    for mask in 0..(1u32 << (d - 1)) {
        let mut corner = vec![1.0];
        for bit in 0..(d - 1) {
            corner.push(if mask >> bit & 1 == 1 { 1.0 } else { -1.0 });
        }
        points.push(corner);
    }
    for axis in 0..d {
        let mut center = vec![0.0; d];
        center[axis] = 1.0;
        points.push(center);
    }
    points
}
