//! Eigenvalue and Cheeger analysis of the regular multigraphs.
//!
//! The canonical operator is the normalized adjacency `A/|S|`: entry
//! `(v, w)` is the number of generators mapping `v` to `w`, divided by the
//! degree, with loops on the diagonal. For symmetric generator lists this
//! matrix is symmetric and doubly stochastic, so its spectrum lives in
//! `[-1, 1]` with top eigenvalue 1 on the constant vector.
//!
//! Eigenvalues are extracted by deflated power iteration on a shifted
//! positive-definite form of the operator, and every reported eigenpair is
//! certified a posteriori by its residual against the *unshifted* operator.
//! The Cheeger constant is computed exactly by subset exhaustion on small
//! graphs and sandwiched by the standard spectral bounds everywhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::CayleyGraph;
use crate::rng::SplitMix64;

/// Largest vertex count for the exhaustive Cheeger search.
pub const CHEEGER_EXACT_CAP: usize = 24;

/// Largest vertex count for the dense eigensolver oracle.
pub const DENSE_SPECTRUM_CAP: usize = 2048;

/// Default iteration cap per eigenpair in the power iteration.
pub const POWER_ITERATION_CAP: usize = 1_000_000;

/// The normalized adjacency `A/|S|` of a regular multigraph, stored in
/// compressed sparse row form. Rows sum to exactly 1.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    weight: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn from_graph(graph: &CayleyGraph) -> Self {
        let n = graph.n_vertices();
        let degree = graph.degree() as f64;
        let lists = graph.neighbor_lists();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut weight = Vec::new();
        row_ptr.push(0);
        for list in &lists {
            for &(w, m) in list {
                col.push(w);
                weight.push(f64::from(m) / degree);
            }
            row_ptr.push(col.len());
        }
        NormalizedAdjacency {
            n,
            row_ptr,
            col,
            weight,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `y = (A/|S|) x`. Row sums are computed left to right, so the result
    /// is bitwise deterministic.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.weight[idx] * x[self.col[idx] as usize];
            }
            *yi = acc;
        }
    }

    /// Dense copy, for the small-graph eigensolver oracle.
    fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[idx] as usize)] = self.weight[idx];
            }
        }
        m
    }
}

/// An eigenvalue of the normalized adjacency together with its certified
/// residual `|| (A/|S|) x - lambda x ||_2` for the unit eigenvector `x`
/// the iteration produced.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertifiedEigenvalue {
    pub value: f64,
    pub residual: f64,
}

/// Top `k` eigenvalues of `A/|S|` in descending (algebraic) order, each
/// certified by its residual. Uses the default iteration cap.
pub fn spectrum_topk(graph: &CayleyGraph, k: usize, tol: f64) -> Result<Vec<CertifiedEigenvalue>> {
    spectrum_topk_capped(graph, k, tol, POWER_ITERATION_CAP)
}

/// [`spectrum_topk`] with an explicit per-eigenpair iteration cap.
pub fn spectrum_topk_capped(
    graph: &CayleyGraph,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<CertifiedEigenvalue>> {
    Ok(topk_eigenpairs(graph, k, tol, max_iter)?
        .into_iter()
        .map(|(eig, _)| eig)
        .collect())
}

/// Top `k` certified eigenpairs (value and unit eigenvector) of `A/|S|`
/// in descending order.
///
/// Each eigenpair is found by power iteration on the positive-definite
/// shift `B = (A/|S| + 3 I)/4`, whose eigenvalues `(lambda + 3)/4` are an
/// increasing map of the original ones — so descending order is preserved
/// and the bottom of the spectrum cannot stall the iteration at zero.
/// Converged eigenvectors are deflated by re-orthogonalization.
pub fn topk_eigenpairs(
    graph: &CayleyGraph,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<(CertifiedEigenvalue, Vec<f64>)>> {
    let op = NormalizedAdjacency::from_graph(graph);
    let n = op.n();
    if k == 0 || k > n {
        return Err(Error::Argument(format!(
            "requested {k} eigenvalues from a graph on {n} vertices"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "residual tolerance must be positive, got {tol}"
        )));
    }
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    let mut work = vec![0.0; n];
    for pair in 0..k {
        let mut rng = SplitMix64::new(0x5eed_0000 + pair as u64);
        let mut x: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        orthonormalize(&mut x, &found)
            .ok_or_else(|| Error::Internal("start vector collapsed under deflation".into()))?;
        let mut accepted = None;
        let mut last_residual = f64::INFINITY;
        let mut iter = 0usize;
        while iter < max_iter {
            // One multiplication serves both the shift step and, on check
            // iterations, the residual of the unshifted operator.
            op.apply(&x, &mut work);
            if iter.is_multiple_of(8) || iter + 1 == max_iter {
                let lambda = dot(&x, &work);
                let mut res_sq = 0.0;
                for i in 0..n {
                    let r = work[i] - lambda * x[i];
                    res_sq += r * r;
                }
                last_residual = res_sq.sqrt();
                if last_residual <= tol {
                    accepted = Some(CertifiedEigenvalue {
                        value: lambda,
                        residual: last_residual,
                    });
                    break;
                }
            }
            for i in 0..n {
                work[i] = 0.25 * work[i] + 0.75 * x[i];
            }
            std::mem::swap(&mut x, &mut work);
            orthonormalize(&mut x, &found)
                .ok_or_else(|| Error::Internal("iterate collapsed under deflation".into()))?;
            iter += 1;
        }
        let eig = accepted.ok_or_else(|| {
            Error::Convergence(format!(
                "eigenpair {pair} residual {last_residual:.3e} still above {tol:.3e} \
                 after {max_iter} iterations"
            ))
        })?;
        found.push(x.clone());
        out.push((eig, x));
    }
    Ok(out)
}

/// Second-largest eigenvalue of `A/|S|` with its residual.
pub fn lambda2(graph: &CayleyGraph, tol: f64) -> Result<CertifiedEigenvalue> {
    if graph.n_vertices() < 2 {
        return Err(Error::Argument(
            "second eigenvalue needs at least two vertices".into(),
        ));
    }
    Ok(spectrum_topk(graph, 2, tol)?[1])
}

/// Full spectrum of `A/|S|` by a dense symmetric eigensolver, sorted in
/// descending order. The independent oracle for the sparse iteration;
/// capped at [`DENSE_SPECTRUM_CAP`] vertices.
pub fn dense_spectrum(graph: &CayleyGraph) -> Result<Vec<f64>> {
    let n = graph.n_vertices();
    if n > DENSE_SPECTRUM_CAP {
        return Err(Error::Resource(format!(
            "dense spectrum limited to {DENSE_SPECTRUM_CAP} vertices, graph has {n}"
        )));
    }
    let m = NormalizedAdjacency::from_graph(graph).to_dense();
    // The multiset adjacency is symmetric; symmetrize to sweep out
    // floating-point asymmetry from the division by the degree.
    let sym = (&m + m.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Full eigendecomposition of `A/|S|` by the dense symmetric solver:
/// `(eigenvalue, unit eigenvector)` pairs in descending eigenvalue order.
/// Capped at [`DENSE_SPECTRUM_CAP`] vertices.
pub fn dense_eigenpairs(graph: &CayleyGraph) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = graph.n_vertices();
    if n > DENSE_SPECTRUM_CAP {
        return Err(Error::Resource(format!(
            "dense eigendecomposition limited to {DENSE_SPECTRUM_CAP} vertices, graph has {n}"
        )));
    }
    let m = NormalizedAdjacency::from_graph(graph).to_dense();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            (eig.eigenvalues[j], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    Ok(pairs)
}

/// Exact Cheeger constant
/// `h = min { boundary(F)/|F| : 0 < |F|, 2|F| <= |V| }`,
/// where `boundary(F)` counts edges from `F` to its complement with
/// multiplicity. Exhausts all subsets, so the graph may have at most
/// [`CHEEGER_EXACT_CAP`] vertices.
pub fn cheeger_exact(graph: &CayleyGraph) -> Result<f64> {
    let n = graph.n_vertices();
    if n > CHEEGER_EXACT_CAP {
        return Err(Error::Resource(format!(
            "exhaustive Cheeger search limited to {CHEEGER_EXACT_CAP} vertices, graph has {n}; \
             use the spectral bounds from the report instead"
        )));
    }
    // Loops never cross a cut; keep only off-diagonal multiplicities.
    let lists = graph.neighbor_lists();
    let adj: Vec<Vec<(u32, u32)>> = lists
        .iter()
        .enumerate()
        .map(|(v, list)| {
            list.iter()
                .copied()
                .filter(|&(w, _)| w as usize != v)
                .collect()
        })
        .collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones();
        if 2 * size > n as u32 {
            continue;
        }
        let mut boundary = 0u64;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for &(w, m) in &adj[v] {
                if mask >> w & 1 == 0 {
                    boundary += u64::from(m);
                }
            }
        }
        let ratio = boundary as f64 / f64::from(size);
        if ratio < best {
            best = ratio;
        }
    }
    Ok(best)
}

/// Integer lower bound on the diameter of a `d`-regular graph: the ball
/// of radius `r` holds at most `O((d-1)^r)` vertices, so the diameter is
/// at least `ceil(log_{d-1} |V|) - 1` for `d >= 3`. For `d <= 2` the
/// graph is a union of paths and cycles and `floor(|V|/2)` is used.
pub fn diameter_lower_bound(n_vertices: usize, degree: usize) -> u64 {
    if degree <= 2 {
        return (n_vertices / 2).max(1) as u64;
    }
    let base = (degree - 1) as u128;
    let target = n_vertices as u128;
    let mut power = 1u128;
    let mut m = 0u64;
    while power < target {
        power = power.saturating_mul(base);
        m += 1;
    }
    m.saturating_sub(1).max(1)
}

/// Spectral summary of one graph: the second eigenvalue, the gap, the
/// Cheeger sandwich, and (on small graphs) the exact Cheeger constant.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub graph_id: String,
    pub q: u32,
    pub n_vertices: usize,
    pub degree: usize,
    pub lambda2: f64,
    pub lambda2_residual: f64,
    pub spectral_gap: f64,
    /// `degree * gap / 2 <= h`: the easy direction of the sandwich.
    pub cheeger_lower: f64,
    /// `h <= degree * sqrt(2 * gap)`: the hard direction.
    pub cheeger_upper: f64,
    /// Exact Cheeger constant when the subset exhaustion is feasible.
    pub h_exact: Option<f64>,
    /// Ball-growth lower bound on the diameter.
    pub diameter_lower: u64,
}

impl SpectralReport {
    /// One CSV data row in the column order
    /// `graph_id,q,|V|,degree,lambda2,gap,cheeger_lower,cheeger_upper,h_exact`.
    pub fn csv_row(&self) -> String {
        let h = self.h_exact.map_or(String::new(), |h| h.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.graph_id,
            self.q,
            self.n_vertices,
            self.degree,
            self.lambda2,
            self.spectral_gap,
            self.cheeger_lower,
            self.cheeger_upper,
            h
        )
    }

    /// CSV header matching [`Self::csv_row`].
    pub fn csv_header() -> &'static str {
        "graph_id,q,|V|,degree,lambda2,gap,cheeger_lower,cheeger_upper,h_exact"
    }
}

/// Builds the [`SpectralReport`] for one graph. The exact Cheeger
/// constant is filled in whenever the graph is small enough, and the
/// sandwich is then verified — a violation would mean one of the two
/// computations is wrong, so it is an internal error, not a report entry.
pub fn spectral_report(graph: &CayleyGraph, tol: f64) -> Result<SpectralReport> {
    let eig = lambda2(graph, tol)?;
    if eig.value.abs() > 1.0 + 1e-9 {
        return Err(Error::Internal(format!(
            "second eigenvalue {} outside [-1, 1]",
            eig.value
        )));
    }
    let gap = (1.0 - eig.value).max(0.0);
    let degree = graph.degree() as f64;
    let cheeger_lower = degree * gap / 2.0;
    let cheeger_upper = degree * (2.0 * gap).sqrt();
    let h_exact = if graph.n_vertices() <= CHEEGER_EXACT_CAP {
        let h = cheeger_exact(graph)?;
        // Sandwich check with a little slack for the certified residual.
        let slack = degree * (tol + 1e-12);
        if h + slack < cheeger_lower || h > cheeger_upper + slack {
            return Err(Error::Internal(format!(
                "Cheeger sandwich violated: {cheeger_lower} <= {h} <= {cheeger_upper} fails"
            )));
        }
        Some(h)
    } else {
        None
    };
    Ok(SpectralReport {
        graph_id: graph.graph_id().to_string(),
        q: graph.q(),
        n_vertices: graph.n_vertices(),
        degree: graph.degree(),
        lambda2: eig.value,
        lambda2_residual: eig.residual,
        spectral_gap: gap,
        cheeger_lower,
        cheeger_upper,
        h_exact,
        diameter_lower: diameter_lower_bound(graph.n_vertices(), graph.degree()),
    })
}

/// Family-level summary across graphs of a common degree.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub reports: Vec<SpectralReport>,
    pub shared_degree: usize,
    pub min_spectral_gap: f64,
    pub min_cheeger_lower: f64,
    /// The user's expansion threshold and whether every graph clears it.
    pub epsilon: f64,
    pub uniform_above_epsilon: bool,
    pub sizes_strictly_increasing: bool,
}

/// Per-graph reports plus the family summary. All graphs must share one
/// degree; otherwise the family comparison is meaningless and rejected.
pub fn expander_report(graphs: &[CayleyGraph], epsilon: f64, tol: f64) -> Result<FamilyReport> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::Argument("family must contain at least one graph".into()))?;
    let shared_degree = first.degree();
    if let Some(odd) = graphs.iter().find(|g| g.degree() != shared_degree) {
        return Err(Error::Argument(format!(
            "mixed degrees in family: '{}' has degree {}, expected {}",
            odd.graph_id(),
            odd.degree(),
            shared_degree
        )));
    }
    let reports: Vec<SpectralReport> = graphs
        .iter()
        .map(|g| spectral_report(g, tol))
        .collect::<Result<_>>()?;
    let min_spectral_gap = reports
        .iter()
        .map(|r| r.spectral_gap)
        .fold(f64::INFINITY, f64::min);
    let min_cheeger_lower = reports
        .iter()
        .map(|r| r.cheeger_lower)
        .fold(f64::INFINITY, f64::min);
    let sizes_strictly_increasing = reports
        .windows(2)
        .all(|w| w[0].n_vertices < w[1].n_vertices);
    Ok(FamilyReport {
        shared_degree,
        min_spectral_gap,
        min_cheeger_lower,
        epsilon,
        uniform_above_epsilon: min_cheeger_lower >= epsilon,
        sizes_strictly_increasing,
        reports,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Projects `x` orthogonal to every vector in `basis` (two passes of
/// modified Gram-Schmidt for stability) and normalizes. Returns `None`
/// if the projection annihilates `x`.
fn orthonormalize(x: &mut [f64], basis: &[Vec<f64>]) -> Option<()> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            for i in 0..x.len() {
                x[i] -= c * b[i];
            }
        }
    }
    let norm = dot(x, x).sqrt();
    if norm < 1e-300 {
        return None;
    }
    for v in x.iter_mut() {
        *v /= norm;
    }
    Some(())
}
