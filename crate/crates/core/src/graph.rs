//! Cayley and Schreier multigraphs over congruence quotients.
//!
//! Graphs are stored as directed generator-edges ("arrows"): one arrow
//! `(v, s v, s)` per vertex and generator. The undirected multigraph they
//! describe follows the conventions used throughout the spectral layer:
//!
//! * edge `{v, w}` carries multiplicity `|{s in S : s v = w}|`,
//! * a loop contributes 1 to the degree (one arrow with `src = dst`),
//! * every vertex has degree exactly `|S|`.
//!
//! Because the generator list is symmetric, the arrow multiset is
//! symmetric too (`s v = w` iff `s^{-1} w = v`), so the adjacency counts
//! form a symmetric matrix and the total arrow count `|V| * |S|` is the
//! handshake sum.

use std::fmt::Write as _;
use std::path::Path;

use crate::congruence::{is_prime, GeneratingSet, GroupTable};
use crate::error::{Error, Result};

/// Cap on the number of vertices a Schreier action set may have.
const VERTEX_CAP: u64 = 10_000_000;

/// One directed generator-edge: generator `gen` maps `src` to `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrow {
    pub src: u32,
    pub dst: u32,
    pub gen: u16,
}

/// Which set a Schreier construction acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchreierAction {
    /// Lines through the origin in `(Z/qZ)^n`, i.e. projective space
    /// `P^{n-1}(F_q)`. Requires a prime modulus so that scaling by units
    /// identifies exactly the nonzero multiples.
    ProjectiveSpace,
    /// All nonzero vectors in `(Z/qZ)^n`. Valid for composite moduli.
    NonzeroVectors,
}

/// A regular multigraph with generator-labelled directed edges.
///
/// Despite the name this one type carries every graph in the crate:
/// Cayley graphs, Schreier quotients, file-loaded graphs, and hand-built
/// test graphs, all sharing the degree and multiplicity conventions above.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    graph_id: String,
    /// Matrix size of the underlying group; 0 for synthetic graphs.
    n: usize,
    /// Modulus of the underlying group; 0 for synthetic graphs.
    q: u32,
    n_vertices: usize,
    degree: usize,
    arrows: Vec<Arrow>,
}

impl CayleyGraph {
    /// Validates and wraps a raw arrow list.
    ///
    /// Checks that every vertex has exactly `degree` out-arrows with
    /// exactly one arrow per `(vertex, generator)` pair, that endpoints
    /// are in range, and that the arrow multiset is symmetric (for
    /// `v != w`, `v -> w` and `w -> v` occur equally often).
    pub fn from_arrows(
        graph_id: &str,
        n: usize,
        q: u32,
        n_vertices: usize,
        degree: usize,
        mut arrows: Vec<Arrow>,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::Argument(
                "graph must have at least one vertex".into(),
            ));
        }
        if degree == 0 {
            return Err(Error::Argument("graph degree must be positive".into()));
        }
        if arrows.len() != n_vertices * degree {
            return Err(Error::Argument(format!(
                "expected {} arrows ({} vertices x degree {}), got {}",
                n_vertices * degree,
                n_vertices,
                degree,
                arrows.len()
            )));
        }
        // Canonical storage order: one block per vertex, one slot per
        // generator. This makes equal graphs compare equal.
        arrows.sort_by_key(|a| (a.src, a.gen));
        for (i, a) in arrows.iter().enumerate() {
            let (v, g) = ((i / degree) as u32, (i % degree) as u16);
            if a.src != v || a.gen != g {
                return Err(Error::Argument(format!(
                    "vertex {v} lacks exactly one arrow for generator {g}"
                )));
            }
            if a.dst as usize >= n_vertices {
                return Err(Error::Argument(format!(
                    "arrow target {} is out of range for {} vertices",
                    a.dst, n_vertices
                )));
            }
        }
        let graph = CayleyGraph {
            graph_id: graph_id.to_string(),
            n,
            q,
            n_vertices,
            degree,
            arrows,
        };
        graph.check_symmetric_multiset()?;
        Ok(graph)
    }

    /// Verifies that directed counts between distinct vertices match in
    /// both directions, so the arrows describe an undirected multigraph.
    fn check_symmetric_multiset(&self) -> Result<()> {
        let mut counts: std::collections::HashMap<(u32, u32), i64> =
            std::collections::HashMap::new();
        for a in &self.arrows {
            if a.src == a.dst {
                continue;
            }
            let (lo, hi) = (a.src.min(a.dst), a.src.max(a.dst));
            *counts.entry((lo, hi)).or_insert(0) += if a.src == lo { 1 } else { -1 };
        }
        if counts.values().any(|&c| c != 0) {
            return Err(Error::Argument(
                "arrow multiset is not symmetric; the graph is directed".into(),
            ));
        }
        Ok(())
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// `|S|`: the regular degree, loops counting 1.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    /// Number of loop arrows at vertex `v`.
    pub fn loops_at(&self, v: u32) -> usize {
        self.out_arrows(v).iter().filter(|a| a.dst == v).count()
    }

    /// The `degree` arrows leaving `v`, ordered by generator index.
    pub fn out_arrows(&self, v: u32) -> &[Arrow] {
        let start = v as usize * self.degree;
        &self.arrows[start..start + self.degree]
    }

    /// Aggregated neighbour lists: for each vertex, `(w, multiplicity)`
    /// pairs sorted by `w`, loops included with their own multiplicity.
    pub fn neighbor_lists(&self) -> Vec<Vec<(u32, u32)>> {
        let mut lists = vec![Vec::new(); self.n_vertices];
        for v in 0..self.n_vertices as u32 {
            let mut dsts: Vec<u32> = self.out_arrows(v).iter().map(|a| a.dst).collect();
            dsts.sort_unstable();
            let list: &mut Vec<(u32, u32)> = &mut lists[v as usize];
            for d in dsts {
                match list.last_mut() {
                    Some((w, m)) if *w == d => *m += 1,
                    _ => list.push((d, 1)),
                }
            }
        }
        lists
    }

    /// Per-generator vertex maps: `perms[g][v]` is the endpoint of the
    /// generator-`g` arrow out of `v`. Each map is a permutation because
    /// generators act invertibly.
    pub fn generator_permutations(&self) -> Result<Vec<Vec<u32>>> {
        let mut perms = vec![vec![0u32; self.n_vertices]; self.degree];
        for a in &self.arrows {
            perms[a.gen as usize][a.src as usize] = a.dst;
        }
        for (g, p) in perms.iter().enumerate() {
            let mut seen = vec![false; self.n_vertices];
            for &w in p {
                if std::mem::replace(&mut seen[w as usize], true) {
                    return Err(Error::Argument(format!(
                        "generator {g} does not act as a permutation of the vertices"
                    )));
                }
            }
        }
        Ok(perms)
    }

    /// Whether the graph is connected, by breadth-first search from 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for a in self.out_arrows(v) {
                if !seen[a.dst as usize] {
                    seen[a.dst as usize] = true;
                    count += 1;
                    stack.push(a.dst);
                }
            }
        }
        count == self.n_vertices
    }

    /// The same graph with vertices renamed by `perm` (`new = perm[old]`).
    /// Used to test relabeling invariance of spectral quantities.
    pub fn relabel(&self, perm: &[u32]) -> Result<CayleyGraph> {
        if perm.len() != self.n_vertices {
            return Err(Error::Argument(
                "permutation length must match vertex count".into(),
            ));
        }
        let mut seen = vec![false; self.n_vertices];
        for &p in perm {
            if p as usize >= self.n_vertices || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::Argument(
                    "not a permutation of the vertex set".into(),
                ));
            }
        }
        let arrows = self
            .arrows
            .iter()
            .map(|a| Arrow {
                src: perm[a.src as usize],
                dst: perm[a.dst as usize],
                gen: a.gen,
            })
            .collect();
        CayleyGraph::from_arrows(
            &format!("{}-relabeled", self.graph_id),
            self.n,
            self.q,
            self.n_vertices,
            self.degree,
            arrows,
        )
    }

    /// Serializes to the plain-text graph format:
    /// a header line `n q |V| |S|`, then one `src dst gen` line per arrow.
    pub fn to_file_string(&self) -> String {
        let mut out = String::with_capacity(16 * self.arrows.len() + 32);
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.n, self.q, self.n_vertices, self.degree
        );
        for a in &self.arrows {
            let _ = writeln!(out, "{} {} {}", a.src, a.dst, a.gen);
        }
        out
    }

    pub fn write_graph_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    /// Parses the graph file format produced by [`Self::to_file_string`].
    /// The graph id is taken from the file stem.
    pub fn read_graph_file(path: &Path) -> Result<CayleyGraph> {
        let text = std::fs::read_to_string(path)?;
        let graph_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("graph")
            .to_string();
        Self::parse_file_string(&graph_id, &text)
    }

    /// Parses graph-file text. Exposed separately so callers can parse
    /// from memory.
    pub fn parse_file_string(graph_id: &str, text: &str) -> Result<CayleyGraph> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "header must be 'n q |V| |S|', got '{header}'"
            )));
        }
        let parse_u = |s: &str, what: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::Parse(format!("invalid {what} '{s}' in header")))
        };
        let n = parse_u(fields[0], "matrix size")? as usize;
        let q = parse_u(fields[1], "modulus")? as u32;
        let n_vertices = parse_u(fields[2], "vertex count")? as usize;
        let degree = parse_u(fields[3], "degree")? as usize;
        let mut arrows = Vec::with_capacity(n_vertices.saturating_mul(degree));
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 'src dst gen', got '{line}'",
                    lineno + 1
                )));
            }
            let src = parse_u(fields[0], "source")? as u32;
            let dst = parse_u(fields[1], "target")? as u32;
            let gen = parse_u(fields[2], "generator index")? as u16;
            arrows.push(Arrow { src, dst, gen });
        }
        CayleyGraph::from_arrows(graph_id, n, q, n_vertices, degree, arrows)
    }
}

/// Builds the Cayley multigraph of an enumerated group: vertices are the
/// table elements, and generator `s` sends `v` to `s v`.
///
/// The generator list must be symmetric (so the graph is undirected) and
/// the table must be closed under the generators; enumerating with the
/// same or a larger generating set guarantees closure.
pub fn cayley_build(table: &GroupTable, gens: &GeneratingSet) -> Result<CayleyGraph> {
    gens.require_symmetric()?;
    if gens.n() != table.n() || gens.q() != table.q() {
        return Err(Error::Argument(
            "generators and group table have mismatched size or modulus".into(),
        ));
    }
    let graph_id = format!("cayley-sl{}-q{}-{}", table.n(), table.q(), gens.label());
    schreier_from_action(
        &graph_id,
        table.n(),
        table.q(),
        table.len(),
        gens,
        |s, v| {
            let h = s.mul(table.element(v))?;
            table.index_of(&h).ok_or_else(|| {
                Error::Argument("group table is not closed under the generator list".into())
            })
        },
    )
}

/// Builds the Schreier multigraph of the generator action on projective
/// space or on nonzero vectors.
///
/// The vertex set is the entire action set (not just one orbit), so the
/// graph is disconnected when the action is intransitive; it is still
/// `|S|`-regular with the usual loop and multiplicity conventions.
pub fn schreier_build(gens: &GeneratingSet, action: SchreierAction) -> Result<CayleyGraph> {
    gens.require_symmetric()?;
    let (n, q) = (gens.n(), gens.q());
    match action {
        SchreierAction::ProjectiveSpace => {
            if !is_prime(q) {
                return Err(Error::Unsupported(format!(
                    "projective action requires a prime modulus, got {q}"
                )));
            }
            let points = projective_points(n, q)?;
            let index = index_vectors(&points);
            let graph_id = format!("schreier-proj-sl{n}-q{q}-{}", gens.label());
            schreier_from_action(&graph_id, n, q, points.len(), gens, |s, v| {
                let image = s.apply_vector(&points[v as usize])?;
                let canon = canonical_line_rep(&image, q);
                index.get(&canon).copied().ok_or_else(|| {
                    Error::Internal("generator image missing from projective point table".into())
                })
            })
        }
        SchreierAction::NonzeroVectors => {
            let vectors = nonzero_vectors(n, q)?;
            let index = index_vectors(&vectors);
            let graph_id = format!("schreier-vec-sl{n}-q{q}-{}", gens.label());
            schreier_from_action(&graph_id, n, q, vectors.len(), gens, |s, v| {
                let image = s.apply_vector(&vectors[v as usize])?;
                index.get(&image).copied().ok_or_else(|| {
                    Error::Internal("generator image missing from vector table".into())
                })
            })
        }
    }
}

/// Shared Schreier-graph core: one arrow `(v, act(s, v), s)` per vertex
/// and generator. Cayley graphs are the special case where the action is
/// left multiplication on the group itself, which is exactly how
/// [`cayley_build`] calls this.
fn schreier_from_action<F>(
    graph_id: &str,
    n: usize,
    q: u32,
    n_vertices: usize,
    gens: &GeneratingSet,
    mut act: F,
) -> Result<CayleyGraph>
where
    F: FnMut(&crate::congruence::ModMatrix, u32) -> Result<u32>,
{
    let degree = gens.len();
    let mut arrows = Vec::with_capacity(n_vertices * degree);
    for v in 0..n_vertices as u32 {
        for (g, s) in gens.elements().iter().enumerate() {
            arrows.push(Arrow {
                src: v,
                dst: act(s, v)?,
                gen: g as u16,
            });
        }
    }
    CayleyGraph::from_arrows(graph_id, n, q, n_vertices, degree, arrows)
}

/// All nonzero vectors of `(Z/qZ)^n` in lexicographic order.
fn nonzero_vectors(n: usize, q: u32) -> Result<Vec<Vec<u32>>> {
    let total = (q as u64)
        .checked_pow(n as u32)
        .filter(|&t| t - 1 <= VERTEX_CAP)
        .ok_or_else(|| {
            Error::Resource(format!("q^n vectors exceed the vertex cap of {VERTEX_CAP}"))
        })?;
    let mut vectors = Vec::with_capacity((total - 1) as usize);
    let mut v = vec![0u32; n];
    loop {
        // Lexicographic increment with most-significant coordinate first.
        let mut i = n;
        while i > 0 {
            i -= 1;
            v[i] += 1;
            if v[i] < q {
                break;
            }
            v[i] = 0;
            if i == 0 {
                return Ok(vectors);
            }
        }
        vectors.push(v.clone());
    }
}

/// Scales a nonzero vector so its first nonzero coordinate is 1, giving
/// the canonical representative of its line. Requires a prime modulus.
fn canonical_line_rep(v: &[u32], q: u32) -> Vec<u32> {
    let lead = v.iter().copied().find(|&x| x != 0).expect("nonzero vector");
    let inv = mod_inverse_prime(lead, q);
    v.iter()
        .map(|&x| ((u64::from(x) * u64::from(inv)) % u64::from(q)) as u32)
        .collect()
}

/// Inverse of a nonzero residue modulo a prime, by Fermat exponentiation.
fn mod_inverse_prime(a: u32, q: u32) -> u32 {
    let (mut base, mut exp, m) = (u64::from(a), u64::from(q) - 2, u64::from(q));
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc as u32
}

/// Canonical representatives of the lines of `(Z/qZ)^n`, in the
/// lexicographic order of their representatives. Count: `(q^n - 1)/(q - 1)`.
fn projective_points(n: usize, q: u32) -> Result<Vec<Vec<u32>>> {
    let all = nonzero_vectors(n, q)?;
    Ok(all
        .into_iter()
        .filter(|v| {
            // Keep exactly the vectors whose leading nonzero entry is 1.
            v.iter().copied().find(|&x| x != 0) == Some(1)
        })
        .collect())
}

fn index_vectors(vectors: &[Vec<u32>]) -> std::collections::HashMap<Vec<u32>, u32> {
    vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i as u32))
        .collect()
}
