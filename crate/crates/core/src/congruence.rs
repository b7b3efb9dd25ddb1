//! Exact arithmetic in `SL(n, Z/qZ)`: reduction of integer matrices,
//! generating sets, the prime-modulus order formula, and breadth-first
//! enumeration of the generated subgroup.
//!
//! All arithmetic is integer-exact. Matrices are stored with entries
//! canonically reduced into `[0, q)`; equality, hashing, and vertex keys
//! are therefore plain entry comparisons with no normalization step.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Default cap on the number of group elements an enumeration may visit.
pub const ENUMERATION_CAP: usize = 10_000_000;

/// A square matrix over `Z/qZ` with determinant 1.
///
/// Entries are stored row-major, each reduced into `[0, q)`. The
/// determinant condition is checked at construction, so any held value
/// is a genuine element of `SL(n, Z/qZ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    n: usize,
    q: u32,
    entries: Vec<u32>,
}

impl ModMatrix {
    /// Builds a matrix from entries already reduced into `[0, q)`.
    ///
    /// Fails with an argument error if the shape is wrong, an entry is
    /// out of range, or the determinant is not 1 mod `q`.
    pub fn new(n: usize, q: u32, entries: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("matrix size must be at least 1".into()));
        }
        if q < 2 {
            return Err(Error::Argument(format!(
                "modulus must be at least 2, got {q}"
            )));
        }
        if entries.len() != n * n {
            return Err(Error::Argument(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e >= q) {
            return Err(Error::Argument(format!(
                "entry {bad} is not reduced modulo {q}"
            )));
        }
        let m = ModMatrix { n, q, entries };
        let d = m.det_mod()?;
        if d != 1 {
            return Err(Error::Argument(format!(
                "determinant is {d} mod {q}, not 1; not an element of SL({n}, Z/{q}Z)"
            )));
        }
        Ok(m)
    }

    /// The identity matrix in `SL(n, Z/qZ)`.
    pub fn identity(n: usize, q: u32) -> Self {
        let mut entries = vec![0u32; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        ModMatrix { n, q, entries }
    }

    /// Elementary transvection `E_ij(c)`: identity plus `c` in position
    /// `(i, j)`, `i != j`. The canonical generator of a root subgroup.
    pub fn transvection(n: usize, q: u32, i: usize, j: usize, c: i64) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return Err(Error::Argument(format!(
                "transvection position ({i}, {j}) must be off-diagonal within a {n}x{n} matrix"
            )));
        }
        let mut m = Self::identity(n, q);
        m.entries[i * n + j] = c.rem_euclid(q as i64) as u32;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Row-major entries, each in `[0, q)`. This slice is the canonical
    /// hash key for vertex tables.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n + j]
    }

    pub fn is_identity(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(idx, &e)| e == u32::from(idx / self.n == idx % self.n))
    }

    /// Matrix product mod `q`. Both operands must share size and modulus.
    pub fn mul(&self, rhs: &ModMatrix) -> Result<ModMatrix> {
        if self.n != rhs.n || self.q != rhs.q {
            return Err(Error::Argument(format!(
                "cannot multiply a {}x{} matrix mod {} by a {}x{} matrix mod {}",
                self.n, self.n, self.q, rhs.n, rhs.n, rhs.q
            )));
        }
        let n = self.n;
        let q = u64::from(self.q);
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                // Entries are < q <= 2^32, so each product fits in u64 and
                // the row sum stays below n * q^2 < 2^64 for desk-scale n.
                let mut acc: u64 = 0;
                for k in 0..n {
                    acc += u64::from(self.entries[i * n + k]) * u64::from(rhs.entries[k * n + j]);
                    acc %= q;
                }
                out[i * n + j] = acc as u32;
            }
        }
        Ok(ModMatrix {
            n,
            q: self.q,
            entries: out,
        })
    }

    /// Applies the matrix to a column vector mod `q`.
    pub fn apply_vector(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.n {
            return Err(Error::Argument(format!(
                "vector length {} does not match matrix size {}",
                v.len(),
                self.n
            )));
        }
        let q = u64::from(self.q);
        let mut out = vec![0u32; self.n];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            let mut acc: u64 = 0;
            for (&a, &b) in row.iter().zip(v) {
                acc = (acc + u64::from(a) * u64::from(b)) % q;
            }
            *o = acc as u32;
        }
        Ok(out)
    }

    /// Inverse via the adjugate. Because the determinant is 1 mod `q`,
    /// the adjugate *is* the inverse, with no modular division needed;
    /// this works for composite moduli too.
    pub fn inverse(&self) -> Result<ModMatrix> {
        let n = self.n;
        let q = i128::from(self.q);
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                // adj(A)[j][i] = (-1)^{i+j} det(minor_ij), transposed here.
                let minor = self.minor_det(i, j)?;
                let sign = if (i + j) % 2 == 0 { 1i128 } else { -1i128 };
                out[j * n + i] = (sign * minor).rem_euclid(q) as u32;
            }
        }
        let inv = ModMatrix {
            n,
            q: self.q,
            entries: out,
        };
        debug_assert!(self.mul(&inv)?.is_identity());
        Ok(inv)
    }

    /// Determinant mod `q`, via exact integer determinant of the lifted
    /// entries followed by reduction. Avoids modular division, so it is
    /// valid for composite moduli.
    fn det_mod(&self) -> Result<u32> {
        let mut lifted: Vec<i128> = self.entries.iter().map(|&e| i128::from(e)).collect();
        let d = det_bareiss(&mut lifted, self.n)?;
        Ok(d.rem_euclid(i128::from(self.q)) as u32)
    }

    /// Integer determinant of the minor obtained by deleting row `i`
    /// and column `j`.
    fn minor_det(&self, i: usize, j: usize) -> Result<i128> {
        let n = self.n;
        if n == 1 {
            return Ok(1);
        }
        let mut sub = Vec::with_capacity((n - 1) * (n - 1));
        for r in 0..n {
            if r == i {
                continue;
            }
            for c in 0..n {
                if c == j {
                    continue;
                }
                sub.push(i128::from(self.entries[r * n + c]));
            }
        }
        det_bareiss(&mut sub, n - 1)
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
        }
        write!(f, " (mod {})", self.q)
    }
}

/// Exact integer determinant by fraction-free Gaussian elimination
/// (Bareiss). All divisions are exact; intermediate growth is checked so
/// oversized inputs fail loudly instead of wrapping.
fn det_bareiss(m: &mut [i128], n: usize) -> Result<i128> {
    debug_assert_eq!(m.len(), n * n);
    let overflow = || Error::Overflow("determinant intermediate exceeds 128-bit range".into());
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n.saturating_sub(1) {
        if m[k * n + k] == 0 {
            // Pivot by row swap; determinant flips sign.
            match (k + 1..n).find(|&r| m[r * n + k] != 0) {
                Some(r) => {
                    for c in 0..n {
                        m.swap(k * n + c, r * n + c);
                    }
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[k * n + k]
                    .checked_mul(m[i * n + j])
                    .ok_or_else(overflow)?;
                let b = m[i * n + k]
                    .checked_mul(m[k * n + j])
                    .ok_or_else(overflow)?;
                m[i * n + j] = a.checked_sub(b).ok_or_else(overflow)? / prev;
            }
            m[i * n + k] = 0;
        }
        prev = m[k * n + k];
    }
    Ok(sign * m[(n - 1) * n + (n - 1)])
}

/// Reduces an integer matrix (row-major) into `SL(n, Z/qZ)`.
///
/// The input must have integer determinant exactly 1 — it is required to
/// be a genuine element of `SL(n, Z)` before reduction, not merely a
/// matrix whose reduction happens to have unit determinant.
pub fn reduce_mod(n: usize, entries: &[i64], q: u32) -> Result<ModMatrix> {
    if n == 0 {
        return Err(Error::Argument("matrix size must be at least 1".into()));
    }
    if entries.len() != n * n {
        return Err(Error::Argument(format!(
            "expected {} entries for a {n}x{n} matrix, got {}",
            n * n,
            entries.len()
        )));
    }
    if q < 2 {
        return Err(Error::Argument(format!(
            "modulus must be at least 2, got {q}"
        )));
    }
    let mut lifted: Vec<i128> = entries.iter().map(|&e| i128::from(e)).collect();
    let d = det_bareiss(&mut lifted, n)?;
    if d != 1 {
        return Err(Error::Argument(format!(
            "integer determinant is {d}, not 1; reduction requires an SL(n, Z) matrix"
        )));
    }
    let reduced: Vec<u32> = entries
        .iter()
        .map(|&e| e.rem_euclid(i64::from(q)) as u32)
        .collect();
    ModMatrix::new(n, q, reduced)
}

/// A finite list of group elements used as graph generators.
///
/// The list is a multiset: repeated elements are kept and each occurrence
/// contributes its own edge, so reductions that collapse two integer
/// generators to the same residue still yield a `|S|`-regular graph with
/// doubled edges rather than silently dropping degree.
#[derive(Debug, Clone)]
pub struct GeneratingSet {
    label: String,
    elements: Vec<ModMatrix>,
}

impl GeneratingSet {
    /// Wraps an explicit element list. All elements must share size and
    /// modulus. Symmetry is *not* required here — enumeration works for
    /// any list — but graph construction checks it separately.
    pub fn new(label: &str, elements: Vec<ModMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Argument("generating set must be non-empty".into()))?;
        let (n, q) = (first.n(), first.q());
        if elements.iter().any(|e| e.n() != n || e.q() != q) {
            return Err(Error::Argument(
                "all generators must share matrix size and modulus".into(),
            ));
        }
        Ok(GeneratingSet {
            label: label.to_string(),
            elements,
        })
    }

    /// The standard symmetric generating set: all elementary transvections
    /// `E_ij(+1)` and `E_ij(-1)`, `i != j`, reduced mod `q`.
    ///
    /// For `q = 2` the two signs coincide after reduction; the duplicates
    /// are kept so the generator count stays `2 n (n-1)` for every modulus.
    pub fn elementary(n: usize, q: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!(
                "elementary generators need matrix size at least 2, got {n}"
            )));
        }
        let mut elements = Vec::with_capacity(2 * n * (n - 1));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                elements.push(ModMatrix::transvection(n, q, i, j, 1)?);
                elements.push(ModMatrix::transvection(n, q, i, j, -1)?);
            }
        }
        Ok(GeneratingSet {
            label: "elem".into(),
            elements,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn elements(&self) -> &[ModMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn n(&self) -> usize {
        self.elements[0].n()
    }

    pub fn q(&self) -> u32 {
        self.elements[0].q()
    }

    /// Whether the multiset is closed under inverses with multiplicity:
    /// every element's inverse occurs exactly as often as the element.
    pub fn is_symmetric(&self) -> Result<bool> {
        let mut balance: HashMap<&[u32], i64> = HashMap::new();
        let inverses: Vec<ModMatrix> = self
            .elements
            .iter()
            .map(ModMatrix::inverse)
            .collect::<Result<_>>()?;
        for e in &self.elements {
            *balance.entry(e.entries()).or_insert(0) += 1;
        }
        for inv in &inverses {
            *balance.entry(inv.entries()).or_insert(0) -= 1;
        }
        Ok(balance.values().all(|&v| v == 0))
    }

    /// Errors unless the multiset is symmetric.
    pub fn require_symmetric(&self) -> Result<()> {
        if self.is_symmetric()? {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "generating set '{}' is not closed under inverses",
                self.label
            )))
        }
    }
}

/// Trial-division primality test; the moduli here are small.
pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_multiple_of(2) {
        return q == 2;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= q as u64 {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Order of `SL(n, Z/qZ)` for prime `q`:
/// `q^{n(n-1)/2} * prod_{k=2..n} (q^k - 1)`, in arbitrary precision.
///
/// Composite moduli are rejected; for those, enumeration is the
/// authoritative count.
pub fn sl_order(n: usize, q: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Argument("matrix size must be at least 1".into()));
    }
    if !is_prime(q) {
        return Err(Error::Unsupported(format!(
            "order formula requires a prime modulus, got {q}; use enumeration instead"
        )));
    }
    let qb = BigUint::from(q);
    let mut order = qb.pow((n * (n - 1) / 2) as u32);
    for k in 2..=n {
        order *= qb.pow(k as u32) - BigUint::from(1u32);
    }
    Ok(order)
}

/// The enumerated elements of a (sub)group, with a lookup index.
///
/// Element indices are the breadth-first discovery order from the
/// identity, which is deterministic for a fixed generator list; vertex
/// numbering in the derived graphs inherits this order.
#[derive(Debug, Clone)]
pub struct GroupTable {
    n: usize,
    q: u32,
    elements: Vec<ModMatrix>,
    index: HashMap<Vec<u32>, u32>,
}

impl GroupTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: u32) -> &ModMatrix {
        &self.elements[i as usize]
    }

    pub fn elements(&self) -> &[ModMatrix] {
        &self.elements
    }

    /// Index of an element, if it belongs to the enumerated set.
    pub fn index_of(&self, m: &ModMatrix) -> Option<u32> {
        self.index.get(m.entries()).copied()
    }

    /// Rebuilds a table from a plain element list (used by the cache
    /// loader). The first element must be the identity.
    pub fn from_elements(elements: Vec<ModMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Argument("element list must be non-empty".into()))?;
        if !first.is_identity() {
            return Err(Error::Argument("element 0 must be the identity".into()));
        }
        let (n, q) = (first.n(), first.q());
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if e.n() != n || e.q() != q {
                return Err(Error::Argument(
                    "all elements must share matrix size and modulus".into(),
                ));
            }
            if index.insert(e.entries().to_vec(), i as u32).is_some() {
                return Err(Error::Argument(format!("duplicate element at index {i}")));
            }
        }
        Ok(GroupTable {
            n,
            q,
            elements,
            index,
        })
    }
}

/// Breadth-first closure of the identity under *left* multiplication by
/// the generators.
///
/// If the generators generate the full group the table size equals the
/// group order; otherwise it is the order of the generated subgroup.
/// Exceeding `cap` (default [`ENUMERATION_CAP`]) is a resource error.
pub fn enumerate_group(gens: &GeneratingSet, cap: Option<usize>) -> Result<GroupTable> {
    let cap = cap.unwrap_or(ENUMERATION_CAP);
    let (n, q) = (gens.n(), gens.q());
    let identity = ModMatrix::identity(n, q);
    let mut elements = vec![identity.clone()];
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    index.insert(identity.entries().to_vec(), 0);
    let mut frontier = 0usize;
    while frontier < elements.len() {
        // Clone the current element so pushes below cannot invalidate it.
        let g = elements[frontier].clone();
        frontier += 1;
        for s in gens.elements() {
            let h = s.mul(&g)?;
            if !index.contains_key(h.entries()) {
                if elements.len() >= cap {
                    return Err(Error::Resource(format!(
                        "group enumeration exceeded the cap of {cap} elements"
                    )));
                }
                index.insert(h.entries().to_vec(), elements.len() as u32);
                elements.push(h);
            }
        }
    }
    Ok(GroupTable {
        n,
        q,
        elements,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elem(n: usize, q: u32) -> GeneratingSet {
        GeneratingSet::elementary(n, q).unwrap()
    }

    #[test]
    fn order_formula_matches_known_values() {
        // Hand-evaluated: q^{n(n-1)/2} * prod (q^k - 1).
        let cases = [
            (2usize, 2u32, 6u64),
            (2, 3, 24),
            (2, 5, 120),
            (2, 7, 336),
            (2, 11, 1320),
            (2, 13, 2184),
            (2, 101, 1_030_200),
            (3, 2, 168),
            (3, 3, 5616),
        ];
        for (n, q, expect) in cases {
            assert_eq!(
                sl_order(n, q).unwrap(),
                BigUint::from(expect),
                "n={n} q={q}"
            );
        }
    }

    #[test]
    fn order_formula_rejects_composite_modulus() {
        let err = sl_order(2, 4).unwrap_err();
        assert_eq!(err.kind(), "unsupported");
    }

    #[test]
    fn primality_by_trial_division() {
        let primes: Vec<u32> = (0..60).filter(|&x| is_prime(x)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
    }

    #[test]
    fn reduce_mod_basic_cases() {
        let id = reduce_mod(2, &[1, 0, 0, 1], 7).unwrap();
        assert!(id.is_identity());

        let e12 = reduce_mod(2, &[1, 1, 0, 1], 2).unwrap();
        assert_eq!(e12.entries(), &[1, 1, 0, 1]);

        // A transvection whose off-diagonal entry is a multiple of q
        // collapses to the identity: the generator becomes a loop.
        let collapsed = reduce_mod(2, &[1, 5, 0, 1], 5).unwrap();
        assert!(collapsed.is_identity());

        // Negative entries reduce into [0, q).
        let neg = reduce_mod(2, &[1, -1, 0, 1], 3).unwrap();
        assert_eq!(neg.entries(), &[1, 2, 0, 1]);
    }

    #[test]
    fn reduce_mod_rejects_non_unimodular_input() {
        let err = reduce_mod(2, &[2, 0, 0, 1], 5).unwrap_err();
        assert_eq!(err.kind(), "argument");
        // Determinant 1 mod q but not 1 over the integers is rejected too:
        // det = 6 here, and 6 = 1 mod 5.
        let err = reduce_mod(2, &[6, 0, 0, 1], 5).unwrap_err();
        assert_eq!(err.kind(), "argument");
    }

    #[test]
    fn constructor_rejects_wrong_determinant_and_range() {
        assert_eq!(
            ModMatrix::new(2, 5, vec![2, 0, 0, 1]).unwrap_err().kind(),
            "argument"
        );
        assert_eq!(
            ModMatrix::new(2, 5, vec![1, 5, 0, 1]).unwrap_err().kind(),
            "argument"
        );
        assert!(ModMatrix::new(2, 5, vec![1, 4, 0, 1]).is_ok());
    }

    #[test]
    fn multiplication_against_integer_oracle() {
        // [[1,1],[0,1]] * [[1,0],[1,1]] = [[2,1],[1,1]] over Z, reduced mod 3.
        let a = ModMatrix::new(2, 3, vec![1, 1, 0, 1]).unwrap();
        let b = ModMatrix::new(2, 3, vec![1, 0, 1, 1]).unwrap();
        let c = a.mul(&b).unwrap();
        assert_eq!(c.entries(), &[2, 1, 1, 1]);
    }

    #[test]
    fn inverse_round_trips_on_random_words() {
        // Deterministic pseudo-random products of elementary generators.
        let gens = elem(3, 7);
        let mut g = ModMatrix::identity(3, 7);
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..60 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let pick = (state >> 33) as usize % gens.len();
            g = gens.elements()[pick].mul(&g).unwrap();
            let inv = g.inverse().unwrap();
            assert!(g.mul(&inv).unwrap().is_identity());
            assert!(inv.mul(&g).unwrap().is_identity());
        }
    }

    #[test]
    fn transvection_inverse_is_opposite_sign() {
        let q = 11;
        let plus = ModMatrix::transvection(2, q, 0, 1, 1).unwrap();
        let minus = ModMatrix::transvection(2, q, 0, 1, -1).unwrap();
        assert_eq!(plus.inverse().unwrap(), minus);
    }

    #[test]
    fn elementary_sets_are_symmetric_with_expected_size() {
        for (n, q) in [(2usize, 2u32), (2, 3), (2, 13), (3, 2), (3, 3)] {
            let gens = elem(n, q);
            assert_eq!(gens.len(), 2 * n * (n - 1), "n={n} q={q}");
            assert!(gens.is_symmetric().unwrap(), "n={n} q={q}");
        }
        // A lone transvection is not symmetric (its inverse is missing).
        let single = GeneratingSet::new(
            "oneway",
            vec![ModMatrix::transvection(2, 5, 0, 1, 1).unwrap()],
        )
        .unwrap();
        assert!(!single.is_symmetric().unwrap());
        assert_eq!(single.require_symmetric().unwrap_err().kind(), "argument");
    }

    #[test]
    fn enumeration_of_identity_only() {
        let gens = GeneratingSet::new("trivial", vec![ModMatrix::identity(2, 5)]).unwrap();
        let table = enumerate_group(&gens, None).unwrap();
        assert_eq!(table.len(), 1);
        assert!(table.element(0).is_identity());
    }

    #[test]
    fn enumeration_matches_order_formula() {
        for (n, q) in [(2usize, 2u32), (2, 3), (2, 5), (2, 7), (3, 2), (3, 3)] {
            let table = enumerate_group(&elem(n, q), None).unwrap();
            let order = sl_order(n, q).unwrap();
            assert_eq!(BigUint::from(table.len()), order, "n={n} q={q}");
        }
    }

    #[test]
    fn enumeration_of_a_proper_subgroup() {
        // E_12(+-1) alone generates the unipotent upper-triangular
        // subgroup of SL(2, Z/5Z), which has exactly q = 5 elements.
        let gens = GeneratingSet::new(
            "upper",
            vec![
                ModMatrix::transvection(2, 5, 0, 1, 1).unwrap(),
                ModMatrix::transvection(2, 5, 0, 1, -1).unwrap(),
            ],
        )
        .unwrap();
        let table = enumerate_group(&gens, None).unwrap();
        assert_eq!(table.len(), 5);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let err = enumerate_group(&elem(2, 5), Some(50)).unwrap_err();
        assert_eq!(err.kind(), "resource");
    }

    #[test]
    fn table_lookup_round_trips() {
        let table = enumerate_group(&elem(2, 3), None).unwrap();
        for i in 0..table.len() as u32 {
            let e = table.element(i).clone();
            assert_eq!(table.index_of(&e), Some(i));
        }
        // An element of a different group is not found.
        let other = ModMatrix::identity(3, 3);
        assert_eq!(table.index_of(&other), None);
    }

    #[test]
    fn table_rebuild_from_elements() {
        let table = enumerate_group(&elem(2, 3), None).unwrap();
        let rebuilt = GroupTable::from_elements(table.elements().to_vec()).unwrap();
        assert_eq!(rebuilt.len(), table.len());
        for i in 0..table.len() as u32 {
            assert_eq!(rebuilt.index_of(table.element(i)), Some(i));
        }
    }

    #[test]
    fn bareiss_determinant_oracle() {
        // 3x3 with known determinant: det = 1*(4*6-5*5) - 2*(3*6-5*1) + 3*(3*5-4*1) = -120 + ... ;
        // evaluated independently: [[1,2,3],[3,4,5],[1,5,6]] has det 1*(24-25)-2*(18-5)+3*(15-4) = -1-26+33 = 6.
        let mut m: Vec<i128> = vec![1, 2, 3, 3, 4, 5, 1, 5, 6];
        assert_eq!(det_bareiss(&mut m, 3).unwrap(), 6);
        let mut singular: Vec<i128> = vec![1, 2, 2, 4];
        assert_eq!(det_bareiss(&mut singular, 2).unwrap(), 0);
    }
}
