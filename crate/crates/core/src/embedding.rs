//! Poincare-inequality obstruction harness and empirical embeddings.
//!
//! The obstruction side works with a probability measure `mu` on words in
//! the graph's generators. Each word acts on vertices through the
//! generator permutations, `mu` averages those actions into a doubly
//! stochastic operator `pi(mu)`, and the quantitative chain is:
//!
//! * `mu_operator_norm` — the norm of `pi(mu)` on mean-zero functions;
//! * `poincare_check` — `mean ||f||^2 <= 4 mean ||(I - pi(mu)) f||^2`,
//!   valid whenever that norm is at most 1/2;
//! * `halfmass_check` — the Markov consequence: a 1-Lipschitz mean-zero
//!   `f` stays below `2 sqrt(2) K` on at least half the vertices, `K`
//!   the longest word in the support of `mu`.
//!
//! The embedding side (`embed_optimize`) searches for low-distortion
//! maps of the graph metric into finite-dimensional `l^p`, starting from
//! a spectral layout and polishing with Adam on a scale-invariant
//! squared-log-ratio loss. Its distortion is an upper bound found by
//! search; the Poincare certificate is the matching lower-bound witness.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::CayleyGraph;
use crate::rng::SplitMix64;
use crate::spectral::topk_eigenpairs;

/// Tolerance on the mean-zero check: the coordinate sums of `f` must
/// vanish to this accuracy.
pub const MEAN_ZERO_TOL: f64 = 1e-9;

/// Default cap on measure squarings in [`shrink_to_half`].
pub const MAX_SQUARINGS: usize = 6;

/// Largest graph for which the all-pairs metric is materialized.
const DISTANCE_CACHE_CAP: usize = 8192;

/// A map from graph vertices into `l^p_d`, stored as a flat row-major
/// coordinate block (vertex-major).
#[derive(Debug, Clone, Serialize)]
pub struct VertexEmbedding {
    pub graph_id: String,
    /// Exponent of the target norm; finite, at least 1.
    pub p: f64,
    pub dim: usize,
    n_vertices: usize,
    coords: Vec<f64>,
    /// Whether the coordinate sums over all vertices vanish within
    /// [`MEAN_ZERO_TOL`].
    pub mean_zero: bool,
}

impl VertexEmbedding {
    pub fn new(
        graph_id: &str,
        p: f64,
        n_vertices: usize,
        dim: usize,
        coords: Vec<f64>,
    ) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Argument(format!(
                "target exponent must be a finite real >= 1, got {p}"
            )));
        }
        if dim == 0 {
            return Err(Error::Argument("target dimension must be positive".into()));
        }
        if coords.len() != n_vertices * dim {
            return Err(Error::Argument(format!(
                "expected {} coordinates ({} vertices x dim {}), got {}",
                n_vertices * dim,
                n_vertices,
                dim,
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument(
                "embedding coordinates must be finite".into(),
            ));
        }
        let mut emb = VertexEmbedding {
            graph_id: graph_id.to_string(),
            p,
            dim,
            n_vertices,
            coords,
            mean_zero: false,
        };
        emb.mean_zero = emb.coordinate_sum_norm() <= MEAN_ZERO_TOL;
        Ok(emb)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn coords(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    /// Euclidean norm of the vector of coordinate sums `sum_x f(x)`.
    fn coordinate_sum_norm(&self) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.dim {
            let mut s = 0.0;
            for v in 0..self.n_vertices {
                s += self.coords[v * self.dim + c];
            }
            acc += s * s;
        }
        acc.sqrt()
    }

    /// Subtracts the vertex average from every coordinate, making the
    /// embedding exactly mean-zero up to rounding. Translation does not
    /// change any pairwise distance or Lipschitz constant.
    pub fn subtract_mean(&mut self) {
        let n = self.n_vertices as f64;
        for c in 0..self.dim {
            let mut s = 0.0;
            for v in 0..self.n_vertices {
                s += self.coords[v * self.dim + c];
            }
            let mean = s / n;
            for v in 0..self.n_vertices {
                self.coords[v * self.dim + c] -= mean;
            }
        }
        self.mean_zero = self.coordinate_sum_norm() <= MEAN_ZERO_TOL;
    }

    /// `l^p` norm of `f(v)`.
    pub fn norm_of(&self, v: usize) -> f64 {
        lp_norm(self.coords(v), self.p)
    }

    /// `l^p` distance between `f(v)` and `f(w)`.
    pub fn pair_distance(&self, v: usize, w: usize) -> f64 {
        let (a, b) = (self.coords(v), self.coords(w));
        let mut acc = 0.0;
        if (self.p - 2.0).abs() < 1e-15 {
            for i in 0..self.dim {
                let d = a[i] - b[i];
                acc += d * d;
            }
            return acc.sqrt();
        }
        for i in 0..self.dim {
            acc += (a[i] - b[i]).abs().powf(self.p);
        }
        acc.powf(1.0 / self.p)
    }
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    if (p - 2.0).abs() < 1e-15 {
        return x.iter().map(|&c| c * c).sum::<f64>().sqrt();
    }
    x.iter()
        .map(|&c| c.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// One weighted word in a [`GeneratorMeasure`]: the group element is the
/// product of the listed generators and acts on vertices through the
/// graph's generator permutations.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureAtom {
    /// Generator indices, leftmost applied last (word `[a, b]` is the
    /// element `s_a s_b`). The empty word is the identity.
    pub word: Vec<u16>,
    pub weight: f64,
}

/// A probability measure on words in the graph generators.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorMeasure {
    atoms: Vec<MeasureAtom>,
    symmetric: bool,
}

impl GeneratorMeasure {
    /// Wraps explicit atoms. Weights must be nonnegative and sum to 1
    /// within `1e-9`. The `symmetric` flag asserts `mu(g) = mu(g^{-1})`;
    /// it is the caller's statement, propagated through convolutions.
    pub fn new(atoms: Vec<MeasureAtom>, symmetric: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Argument(
                "measure must have at least one atom".into(),
            ));
        }
        if atoms
            .iter()
            .any(|a| !(a.weight >= 0.0) || !a.weight.is_finite())
        {
            return Err(Error::Argument(
                "measure weights must be nonnegative".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "measure weights sum to {total}, expected 1"
            )));
        }
        Ok(GeneratorMeasure { atoms, symmetric })
    }

    /// The point mass at the identity (empty word).
    pub fn dirac_identity() -> Self {
        GeneratorMeasure {
            atoms: vec![MeasureAtom {
                word: Vec::new(),
                weight: 1.0,
            }],
            symmetric: true,
        }
    }

    /// Uniform measure on the single generators `0..n_gens`. Symmetric
    /// because every graph built in this crate has a symmetric generator
    /// list (each generator's inverse is also a generator).
    pub fn uniform(n_gens: usize) -> Result<Self> {
        if n_gens == 0 {
            return Err(Error::Argument("generator count must be positive".into()));
        }
        let w = 1.0 / n_gens as f64;
        let atoms = (0..n_gens as u16)
            .map(|g| MeasureAtom {
                word: vec![g],
                weight: w,
            })
            .collect();
        Ok(GeneratorMeasure {
            atoms,
            symmetric: true,
        })
    }

    /// Convex mixture `theta * a + (1 - theta) * b`.
    pub fn mixture(theta: f64, a: &GeneratorMeasure, b: &GeneratorMeasure) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Argument(format!(
                "mixture weight must lie in [0,1], got {theta}"
            )));
        }
        let mut atoms = Vec::with_capacity(a.atoms.len() + b.atoms.len());
        for at in &a.atoms {
            atoms.push(MeasureAtom {
                word: at.word.clone(),
                weight: theta * at.weight,
            });
        }
        for at in &b.atoms {
            atoms.push(MeasureAtom {
                word: at.word.clone(),
                weight: (1.0 - theta) * at.weight,
            });
        }
        GeneratorMeasure::new(atoms, a.symmetric && b.symmetric)
    }

    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Length of the longest word in the support (atoms of weight 0 are
    /// ignored). This is the `K` of the half-mass bound.
    pub fn max_word_length(&self) -> u32 {
        self.atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| a.word.len() as u32)
            .max()
            .unwrap_or(0)
    }
}

/// The averaged action of a measure on a fixed graph: for each atom, the
/// permutation tables of the word and of its inverse.
struct MeasureOperator {
    n: usize,
    /// `(weight, forward, backward)`: `forward[x] = gamma x` and
    /// `backward[x] = gamma^{-1} x`.
    terms: Vec<(f64, Vec<u32>, Vec<u32>)>,
}

impl MeasureOperator {
    fn build(graph: &CayleyGraph, mu: &GeneratorMeasure) -> Result<Self> {
        let perms = graph.generator_permutations()?;
        let n = graph.n_vertices();
        let mut terms = Vec::with_capacity(mu.atoms().len());
        for atom in mu.atoms() {
            let forward = word_action(&perms, &atom.word, graph.degree(), n)?;
            let mut backward = vec![0u32; n];
            for (x, &fx) in forward.iter().enumerate() {
                backward[fx as usize] = x as u32;
            }
            terms.push((atom.weight, forward, backward));
        }
        Ok(MeasureOperator { n, terms })
    }

    /// `(pi(mu) f)(x) = sum_atoms w * f(gamma^{-1} x)`, applied to a
    /// block of `dim` coordinates per vertex.
    fn apply(&self, f: &[f64], dim: usize, out: &mut [f64]) {
        out.fill(0.0);
        for (w, _, backward) in &self.terms {
            for (x, &pre) in backward.iter().enumerate() {
                let src = pre as usize * dim;
                let dst = x * dim;
                for c in 0..dim {
                    out[dst + c] += w * f[src + c];
                }
            }
        }
    }

    /// The adjoint: `(pi(mu)^T f)(x) = sum_atoms w * f(gamma x)`.
    fn apply_adjoint(&self, f: &[f64], dim: usize, out: &mut [f64]) {
        out.fill(0.0);
        for (w, forward, _) in &self.terms {
            for (x, &img) in forward.iter().enumerate() {
                let src = img as usize * dim;
                let dst = x * dim;
                for c in 0..dim {
                    out[dst + c] += w * f[src + c];
                }
            }
        }
    }
}

/// Vertex table of the word's action: composes generator permutations,
/// rightmost letter applied first.
fn word_action(perms: &[Vec<u32>], word: &[u16], degree: usize, n: usize) -> Result<Vec<u32>> {
    let mut table: Vec<u32> = (0..n as u32).collect();
    for &g in word.iter().rev() {
        let g = g as usize;
        if g >= degree {
            return Err(Error::Argument(format!(
                "word references generator {g}, but the graph has degree {degree}"
            )));
        }
        for t in table.iter_mut() {
            *t = perms[g][*t as usize];
        }
    }
    Ok(table)
}

fn deflate_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}

/// Operator norm of `pi(mu)` restricted to mean-zero functions: the
/// largest singular value of the deflated operator, computed by power
/// iteration on `pi(mu)^T pi(mu)`.
///
/// `pi(mu)` is an average of permutation operators, hence doubly
/// stochastic: it preserves both constants and the mean-zero subspace,
/// and its norm is at most 1. For a symmetric measure the operator is
/// symmetric and the norm is the largest eigenvalue modulus after
/// deflating the constant vector.
pub fn mu_operator_norm(graph: &CayleyGraph, mu: &GeneratorMeasure) -> Result<f64> {
    let op = MeasureOperator::build(graph, mu)?;
    let n = op.n;
    if n == 1 {
        // The mean-zero subspace is trivial.
        return Ok(0.0);
    }
    let mut rng = SplitMix64::new(0x6e6f_726d);
    let mut x: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    deflate_mean(&mut x);
    normalize(&mut x)?;
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut lambda = 0.0;
    let mut stable = 0u32;
    for _ in 0..200_000 {
        op.apply(&x, 1, &mut y);
        op.apply_adjoint(&y, 1, &mut z);
        deflate_mean(&mut z);
        let next = dot(&x, &z).max(0.0);
        // Residual of the squared operator: certifies the eigenvalue of
        // pi^T pi that the iteration has locked onto.
        let mut res_sq = 0.0;
        for i in 0..n {
            let r = z[i] - next * x[i];
            res_sq += r * r;
        }
        let settled = (next - lambda).abs() <= 1e-15 * next.max(1e-300);
        lambda = next;
        if res_sq.sqrt() <= 1e-12 || settled {
            stable += 1;
            if stable >= 4 {
                break;
            }
        } else {
            stable = 0;
        }
        let norm = dot(&z, &z).sqrt();
        if norm < 1e-300 {
            // pi(mu) annihilates the whole mean-zero space.
            return Ok(0.0);
        }
        for i in 0..n {
            x[i] = z[i] / norm;
        }
    }
    Ok(lambda.sqrt())
}

/// Result of one Poincare-inequality evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoincareCheck {
    /// Average of `||f(x)||^2`.
    pub lhs: f64,
    /// `4 *` average of `||f(x) - (pi(mu) f)(x)||^2`.
    pub rhs: f64,
    /// Whether `lhs <= rhs + 1e-9`.
    pub holds: bool,
}

/// Evaluates both sides of the graph Poincare inequality for a mean-zero
/// `l^2` embedding.
///
/// The inequality `lhs <= rhs` is guaranteed whenever
/// [`mu_operator_norm`] is at most 1/2; this function only evaluates the
/// two sides, so callers can also probe measures beyond that regime.
pub fn poincare_check(
    graph: &CayleyGraph,
    f: &VertexEmbedding,
    mu: &GeneratorMeasure,
) -> Result<PoincareCheck> {
    check_l2_embedding(graph, f)?;
    if !f.mean_zero {
        return Err(Error::Argument(
            "embedding is not mean-zero; subtract the mean first".into(),
        ));
    }
    let op = MeasureOperator::build(graph, mu)?;
    let n = graph.n_vertices();
    let d = f.dim;
    let mut avg = vec![0.0; n * d];
    op.apply(&f.coords, d, &mut avg);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&c, &a) in f.coords.iter().zip(&avg) {
        lhs += c * c;
        let g = c - a;
        rhs += g * g;
    }
    lhs /= n as f64;
    rhs = 4.0 * rhs / n as f64;
    Ok(PoincareCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
    })
}

/// Result of a half-mass evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HalfMassCheck {
    /// Fraction of vertices with `||f(x)|| <= threshold`.
    pub fraction: f64,
    /// `2 sqrt(2) K`.
    pub threshold: f64,
    /// The word length `K` used.
    pub word_length: u32,
    /// The measured operator norm of `pi(mu)` on mean-zero functions.
    pub mu_norm: f64,
}

/// Fraction of vertices where a 1-Lipschitz mean-zero embedding stays
/// below `2 sqrt(2) K`, with `K` the longest word in the support of `mu`
/// (or an explicit override).
///
/// When the measured operator norm is at most 1/2 the fraction is
/// provably at least 1/2 (Poincare bound plus the Markov inequality), so
/// a smaller fraction in that regime is reported as an internal error.
pub fn halfmass_check(
    graph: &CayleyGraph,
    f: &VertexEmbedding,
    mu: &GeneratorMeasure,
    k_override: Option<u32>,
) -> Result<HalfMassCheck> {
    check_l2_embedding(graph, f)?;
    if !f.mean_zero {
        return Err(Error::Argument(
            "embedding is not mean-zero; subtract the mean first".into(),
        ));
    }
    // 1-Lipschitz over every edge implies 1-Lipschitz for the graph
    // metric; verify edge by edge and report the first violation.
    for a in graph.arrows() {
        let d = f.pair_distance(a.src as usize, a.dst as usize);
        if d > 1.0 + 1e-9 {
            return Err(Error::Argument(format!(
                "embedding is not 1-Lipschitz: edge {} -> {} (generator {}) stretches to {d}",
                a.src, a.dst, a.gen
            )));
        }
    }
    let word_length = k_override.unwrap_or_else(|| mu.max_word_length());
    let threshold = 2.0 * std::f64::consts::SQRT_2 * f64::from(word_length);
    let n = graph.n_vertices();
    let good = (0..n).filter(|&v| f.norm_of(v) <= threshold).count();
    let fraction = good as f64 / n as f64;
    let mu_norm = mu_operator_norm(graph, mu)?;
    if mu_norm <= 0.5 - 1e-6 && fraction < 0.5 {
        return Err(Error::Internal(format!(
            "half-mass fraction {fraction} below 1/2 although the operator norm is {mu_norm}; \
             this contradicts the Poincare bound"
        )));
    }
    Ok(HalfMassCheck {
        fraction,
        threshold,
        word_length,
        mu_norm,
    })
}

fn check_l2_embedding(graph: &CayleyGraph, f: &VertexEmbedding) -> Result<()> {
    if (f.p - 2.0).abs() > 1e-12 {
        return Err(Error::Argument(format!(
            "this check requires an l^2 embedding, got p = {}",
            f.p
        )));
    }
    if f.n_vertices != graph.n_vertices() {
        return Err(Error::Argument(format!(
            "embedding covers {} vertices but the graph has {}",
            f.n_vertices,
            graph.n_vertices()
        )));
    }
    Ok(())
}

/// Repeatedly convolves `mu` with itself until the operator norm drops
/// to 1/2 or below, collapsing words with identical vertex action after
/// each squaring so the support stays bounded by the acting group.
///
/// Squaring squares the norm of a symmetric measure, so a starting norm
/// `nu < 1` needs about `log2(log(1/2)/log(nu))` squarings. A norm that
/// is exactly 1 (for instance the uniform measure on a bipartite graph)
/// never shrinks; the cap then yields a convergence error.
pub fn shrink_to_half(
    graph: &CayleyGraph,
    mu: &GeneratorMeasure,
    max_squarings: usize,
) -> Result<GeneratorMeasure> {
    let mut current = mu.clone();
    let mut norm = mu_operator_norm(graph, &current)?;
    for _ in 0..max_squarings {
        if norm <= 0.5 {
            return Ok(current);
        }
        current = convolve_square(graph, &current)?;
        norm = mu_operator_norm(graph, &current)?;
    }
    if norm <= 0.5 {
        return Ok(current);
    }
    Err(Error::Convergence(format!(
        "operator norm is still {norm} after {max_squarings} squarings; \
         it cannot reach 1/2 (is the graph bipartite?)"
    )))
}

/// `mu * mu` on a fixed graph: all two-word concatenations, merged by
/// their vertex action, each merged class keeping its shortest word as
/// representative (ties broken lexicographically, so the result is
/// deterministic).
fn convolve_square(graph: &CayleyGraph, mu: &GeneratorMeasure) -> Result<GeneratorMeasure> {
    let perms = graph.generator_permutations()?;
    let degree = graph.degree();
    // Key each product word by its action table; shorter representative
    // words keep the half-mass constant K as small as possible.
    let mut classes: BTreeMap<Vec<u32>, (Vec<u16>, f64)> = BTreeMap::new();
    for a in mu.atoms() {
        for b in mu.atoms() {
            let weight = a.weight * b.weight;
            if weight == 0.0 {
                continue;
            }
            let mut word = Vec::with_capacity(a.word.len() + b.word.len());
            word.extend_from_slice(&a.word);
            word.extend_from_slice(&b.word);
            let action = word_action(&perms, &word, degree, graph.n_vertices())?;
            match classes.get_mut(&action) {
                Some((rep, w)) => {
                    *w += weight;
                    if word.len() < rep.len() || (word.len() == rep.len() && word < *rep) {
                        *rep = word;
                    }
                }
                None => {
                    classes.insert(action, (word, weight));
                }
            }
        }
    }
    let atoms: Vec<MeasureAtom> = classes
        .into_values()
        .map(|(word, weight)| MeasureAtom { word, weight })
        .collect();
    // The convolution square of a symmetric measure is symmetric.
    GeneratorMeasure::new(atoms, mu.is_symmetric())
}

/// A deterministic random mean-zero embedding into `l^2_dim`, scaled to
/// be exactly 1-Lipschitz over the edges. Useful as a test distribution
/// for the Poincare and half-mass checks.
pub fn random_lipschitz_embedding(
    graph: &CayleyGraph,
    dim: usize,
    seed: u64,
) -> Result<VertexEmbedding> {
    let n = graph.n_vertices();
    let mut rng = SplitMix64::new(seed);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.normal()).collect();
    let mut emb = VertexEmbedding::new(graph.graph_id(), 2.0, n, dim, coords)?;
    let lip = graph
        .arrows()
        .iter()
        .map(|a| emb.pair_distance(a.src as usize, a.dst as usize))
        .fold(0.0f64, f64::max);
    if lip > 1e-300 {
        for c in emb.coords.iter_mut() {
            *c /= lip;
        }
    }
    emb.subtract_mean();
    Ok(emb)
}

/// Output of the distortion search.
#[derive(Debug, Clone, Serialize)]
pub struct EmbedOptimizeResult {
    pub embedding: VertexEmbedding,
    /// Best bi-Lipschitz distortion found (expansion times contraction
    /// over all vertex pairs); always at least 1.
    pub distortion: f64,
    /// Distortion of the spectral initialization, before optimization.
    pub initial_distortion: f64,
    pub iterations_run: usize,
    /// How many times the optimizer restarted with a smaller step after
    /// a numerical blow-up.
    pub restarts: usize,
}

/// All-pairs graph distances by breadth-first search, parallel over
/// sources. Requires a connected graph.
fn all_pairs_distances(graph: &CayleyGraph) -> Result<Vec<u16>> {
    let n = graph.n_vertices();
    if n > DISTANCE_CACHE_CAP {
        return Err(Error::Resource(format!(
            "all-pairs metric materialization limited to {DISTANCE_CACHE_CAP} vertices, \
             graph has {n}"
        )));
    }
    let lists = graph.neighbor_lists();
    let rows: Vec<Vec<u16>> = (0..n)
        .into_par_iter()
        .map(|src| {
            let mut dist = vec![u16::MAX; n];
            let mut queue = std::collections::VecDeque::new();
            dist[src] = 0;
            queue.push_back(src as u32);
            while let Some(v) = queue.pop_front() {
                let dv = dist[v as usize];
                for &(w, _) in &lists[v as usize] {
                    if dist[w as usize] == u16::MAX {
                        dist[w as usize] = dv + 1;
                        queue.push_back(w);
                    }
                }
            }
            dist
        })
        .collect();
    let mut flat = Vec::with_capacity(n * n);
    for row in rows {
        if row.contains(&u16::MAX) {
            return Err(Error::Argument(
                "graph is disconnected; the graph metric is not finite".into(),
            ));
        }
        flat.extend_from_slice(&row);
    }
    Ok(flat)
}

/// Bi-Lipschitz distortion of `coords` against the cached metric:
/// `max(||dx||/d) * max(d/||dx||)` over all vertex pairs. Infinite when
/// two distinct vertices collide.
fn distortion_of(coords: &[f64], dim: usize, p: f64, dist: &[u16], n: usize) -> f64 {
    let mut expansion = 0.0f64;
    let mut contraction = 0.0f64;
    for v in 0..n {
        for w in v + 1..n {
            let d = f64::from(dist[v * n + w]);
            let mut acc = 0.0;
            if (p - 2.0).abs() < 1e-15 {
                for c in 0..dim {
                    let t = coords[v * dim + c] - coords[w * dim + c];
                    acc += t * t;
                }
                acc = acc.sqrt();
            } else {
                for c in 0..dim {
                    acc += (coords[v * dim + c] - coords[w * dim + c]).abs().powf(p);
                }
                acc = acc.powf(1.0 / p);
            }
            if acc <= 0.0 {
                return f64::INFINITY;
            }
            expansion = expansion.max(acc / d);
            contraction = contraction.max(d / acc);
        }
    }
    expansion * contraction
}

/// Searches for a low-distortion embedding of the graph metric into
/// `l^p_dim`.
///
/// The layout starts from the leading mean-zero eigenvectors of the
/// normalized adjacency, rescaled to match the metric's mean pair
/// distance, and is polished by Adam on the squared-log-ratio loss
/// `mean (log ||f(v) - f(w)|| - log d(v, w))^2`. Distortion is evaluated
/// exactly over all pairs at a fixed cadence and the best layout is
/// kept. A numerical blow-up restarts the polish with a quarter of the
/// step size, up to three times, before reporting a convergence error.
pub fn embed_optimize(
    graph: &CayleyGraph,
    p: f64,
    dim: usize,
    iterations: usize,
    seed: u64,
) -> Result<EmbedOptimizeResult> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Argument(format!(
            "target exponent must be a finite real >= 1, got {p}"
        )));
    }
    if dim == 0 || dim > 64 {
        return Err(Error::Argument(format!(
            "target dimension must be in [1, 64], got {dim}"
        )));
    }
    let n = graph.n_vertices();
    if n > 100_000 {
        return Err(Error::Argument(format!(
            "embedding search is limited to 100000 vertices, graph has {n}"
        )));
    }
    if n < 2 {
        return Err(Error::Argument(
            "embedding needs at least two vertices".into(),
        ));
    }
    let dist = all_pairs_distances(graph)?;

    // Spectral initialization: coordinates from the leading mean-zero
    // eigenvectors (the constant top eigenvector only translates points,
    // so it is skipped). Loose residual tolerance; this is a warm start.
    let k = (dim + 1).min(n);
    let pairs = topk_eigenpairs(graph, k, 1e-6, 500_000)?;
    let mut init = vec![0.0; n * dim];
    for (c, (_, vec)) in pairs.iter().skip(1).enumerate() {
        for v in 0..n {
            init[v * dim + c] = vec[v];
        }
    }
    // Degenerate safeguard: if fewer eigenvectors than dimensions, jitter
    // the remaining coordinates so no two vertices start coincident.
    let mut rng = SplitMix64::new(seed);
    if k < dim + 1 {
        for v in 0..n {
            for c in k - 1..dim {
                init[v * dim + c] = 1e-3 * rng.normal();
            }
        }
    }
    // Match scales: mean embedded distance vs mean graph distance.
    let mut sum_embedded = 0.0;
    let mut sum_graph = 0.0;
    for v in 0..n {
        for w in v + 1..n {
            let mut acc = 0.0;
            for c in 0..dim {
                let t = init[v * dim + c] - init[w * dim + c];
                acc += t * t;
            }
            sum_embedded += acc.sqrt();
            sum_graph += f64::from(dist[v * n + w]);
        }
    }
    if sum_embedded > 1e-300 {
        let scale = sum_graph / sum_embedded;
        for c in init.iter_mut() {
            *c *= scale;
        }
    }

    let initial_distortion = distortion_of(&init, dim, p, &dist, n);
    let mut best_coords = init.clone();
    let mut best_distortion = initial_distortion;

    // Adam polish with restart-on-blow-up.
    let all_pairs = n <= 512;
    let batch = 8192usize;
    let mut lr = 0.02;
    let mut restarts = 0usize;
    let mut iterations_run = 0usize;
    'attempt: loop {
        let mut coords = init.clone();
        let mut m = vec![0.0; n * dim];
        let mut v2 = vec![0.0; n * dim];
        let mut grad = vec![0.0; n * dim];
        let mut sampler = SplitMix64::new(seed ^ 0x9e3779b97f4a7c15);
        for it in 0..iterations {
            iterations_run += 1;
            grad.fill(0.0);
            let mut blew_up = false;
            let visit = |v: usize, w: usize, grad: &mut [f64]| {
                let d = f64::from(dist[v * n + w]);
                let mut norm;
                if (p - 2.0).abs() < 1e-15 {
                    norm = 0.0;
                    for c in 0..dim {
                        let t = coords[v * dim + c] - coords[w * dim + c];
                        norm += t * t;
                    }
                    norm = norm.sqrt();
                } else {
                    norm = 0.0;
                    for c in 0..dim {
                        norm += (coords[v * dim + c] - coords[w * dim + c]).abs().powf(p);
                    }
                    norm = norm.powf(1.0 / p);
                }
                if norm < 1e-12 {
                    return; // coincident points carry no usable gradient
                }
                let coeff = 2.0 * (norm.ln() - d.ln()) / norm;
                for c in 0..dim {
                    let t = coords[v * dim + c] - coords[w * dim + c];
                    // d||.||_p / dt_c at the current difference vector.
                    let dnorm = if (p - 2.0).abs() < 1e-15 {
                        t / norm
                    } else {
                        t.signum() * t.abs().powf(p - 1.0) / norm.powf(p - 1.0)
                    };
                    let g = coeff * dnorm;
                    grad[v * dim + c] += g;
                    grad[w * dim + c] -= g;
                }
            };
            if all_pairs {
                for v in 0..n {
                    for w in v + 1..n {
                        visit(v, w, &mut grad);
                    }
                }
            } else {
                for _ in 0..batch {
                    let v = sampler.below(n);
                    let w = sampler.below(n);
                    if v != w {
                        visit(v.min(w), v.max(w), &mut grad);
                    }
                }
            }
            // Adam step.
            let t = (it + 1) as f64;
            let (b1, b2, eps) = (0.9, 0.999, 1e-8);
            for i in 0..n * dim {
                m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
                v2[i] = b2 * v2[i] + (1.0 - b2) * grad[i] * grad[i];
                let mh = m[i] / (1.0 - b1.powf(t));
                let vh = v2[i] / (1.0 - b2.powf(t));
                coords[i] -= lr * mh / (vh.sqrt() + eps);
                if !coords[i].is_finite() {
                    blew_up = true;
                }
            }
            if blew_up {
                restarts += 1;
                if restarts > 3 {
                    return Err(Error::Convergence(
                        "embedding optimizer diverged repeatedly despite step reductions".into(),
                    ));
                }
                lr *= 0.25;
                continue 'attempt;
            }
            if (it + 1) % 20 == 0 || it + 1 == iterations {
                let d = distortion_of(&coords, dim, p, &dist, n);
                if d < best_distortion {
                    best_distortion = d;
                    best_coords.copy_from_slice(&coords);
                }
            }
        }
        break;
    }

    let embedding = VertexEmbedding::new(graph.graph_id(), p, n, dim, best_coords)?;
    Ok(EmbedOptimizeResult {
        embedding,
        distortion: best_distortion,
        initial_distortion,
        iterations_run,
        restarts,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

fn normalize(x: &mut [f64]) -> Result<()> {
    let norm = dot(x, x).sqrt();
    if norm < 1e-300 {
        return Err(Error::Internal("cannot normalize the zero vector".into()));
    }
    for v in x.iter_mut() {
        *v /= norm;
    }
    Ok(())
}
