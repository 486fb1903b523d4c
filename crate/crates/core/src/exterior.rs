//! Compound-matrix linear algebra on exterior powers.
//!
//! Rows and columns of an [`ExteriorMatrix`] of degree `q` are indexed by the
//! `q`-element subsets of `{0, .., m-1}` in strict lexicographic order, as
//! enumerated by [`SubsetBasis`].

use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::special::binomial;

/// Lexicographically ordered `q`-subsets of `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetBasis {
    m: usize,
    q: usize,
    subsets: Vec<Vec<usize>>,
}

impl SubsetBasis {
    pub fn new(m: usize, q: usize) -> Result<Self> {
        if q > m {
            return Err(Error::invalid(format!("subset size {q} exceeds ambient dimension {m}")));
        }
        let subsets = (0..m).combinations(q).collect();
        Ok(SubsetBasis { m, q, subsets })
    }

    pub fn ambient(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn get(&self, idx: usize) -> &[usize] {
        &self.subsets[idx]
    }

    /// Position of `subset` in the lexicographic enumeration.
    pub fn index_of(&self, subset: &[usize]) -> Option<usize> {
        if subset.len() != self.q || !strictly_increasing(subset) || subset.last().is_some_and(|&v| v >= self.m) {
            return None;
        }
        Some(lex_rank(self.m, subset))
    }
}

fn lex_rank(m: usize, subset: &[usize]) -> usize {
    let q = subset.len();
    let mut rank = 0usize;
    let mut next = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for v in next..c {
            rank += binomial(m - v - 1, q - i - 1) as usize;
        }
        next = c + 1;
    }
    rank
}

fn strictly_increasing(s: &[usize]) -> bool {
    s.windows(2).all(|w| w[0] < w[1])
}

/// Sign of the permutation that sorts the concatenation `(first, second)` of
/// two disjoint increasing index sets.
pub fn eps(first: &[usize], second: &[usize]) -> Result<i32> {
    if !strictly_increasing(first) || !strictly_increasing(second) {
        return Err(Error::invalid("index sets must be strictly increasing"));
    }
    let mut inversions = 0usize;
    for &a in first {
        for &b in second {
            if a == b {
                return Err(Error::invalid(format!("index sets overlap at {a}")));
            }
            if a > b {
                inversions += 1;
            }
        }
    }
    Ok(if inversions % 2 == 0 { 1 } else { -1 })
}

/// Matrix of an endomorphism of the `q`-th exterior power of an
/// `m`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorMatrix {
    m: usize,
    q: usize,
    entries: DMatrix<f64>,
}

impl ExteriorMatrix {
    pub fn from_entries(m: usize, q: usize, entries: DMatrix<f64>) -> Result<Self> {
        let n = binomial(m, q) as usize;
        if q > m || entries.nrows() != n || entries.ncols() != n {
            return Err(Error::invalid(format!(
                "degree-{q} exterior matrix over dimension {m} must be {n}x{n}"
            )));
        }
        Ok(ExteriorMatrix { m, q, entries })
    }

    pub fn identity(m: usize, q: usize) -> Result<Self> {
        let n = binomial(m, q) as usize;
        Self::from_entries(m, q, DMatrix::identity(n, n))
    }

    pub fn ambient(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.q
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn transpose(&self) -> Self {
        ExteriorMatrix { m: self.m, q: self.q, entries: self.entries.transpose() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        ExteriorMatrix { m: self.m, q: self.q, entries: &self.entries * factor }
    }

    /// Ordinary matrix product on the same exterior power.
    pub fn compose(&self, other: &ExteriorMatrix) -> Result<Self> {
        if self.m != other.m || self.q != other.q {
            return Err(Error::invalid("cannot compose exterior matrices of different shape"));
        }
        Ok(ExteriorMatrix { m: self.m, q: self.q, entries: &self.entries * &other.entries })
    }

    /// The single entry of a top-degree (or degree-0) exterior matrix.
    pub fn scalar(&self) -> Option<f64> {
        (self.entries.nrows() == 1).then(|| self.entries[(0, 0)])
    }

    /// Largest entrywise difference relative to the largest entry of `self`
    /// (floored at 1).
    pub fn max_relative_diff(&self, other: &ExteriorMatrix) -> f64 {
        let scale = self.entries.amax().max(1.0);
        (&self.entries - &other.entries).amax() / scale
    }
}

impl fmt::Display for ExteriorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ^{} (m = {}): {}", self.q, self.m, self.entries)
    }
}

/// The `q`-th compound matrix of a square matrix: entry `(a, b)` is the minor
/// on rows `a` and columns `b`.
pub fn exterior_power(mat: &DMatrix<f64>, q: usize) -> Result<ExteriorMatrix> {
    if !mat.is_square() {
        return Err(Error::invalid("exterior power needs a square matrix"));
    }
    let m = mat.nrows();
    let basis = SubsetBasis::new(m, q)?;
    let n = basis.len();
    if q == 0 {
        return ExteriorMatrix::identity(m, 0);
    }
    let mut entries = DMatrix::zeros(n, n);
    for (i, rows) in basis.subsets().iter().enumerate() {
        let block = mat.select_rows(rows);
        for (j, cols) in basis.subsets().iter().enumerate() {
            entries[(i, j)] = block.select_columns(cols).determinant();
        }
    }
    ExteriorMatrix::from_entries(m, q, entries)
}

/// One way of splitting a `(p+q)`-subset into a `p`-part and a `q`-part:
/// sign `eps(part_p, part_q)` and the indices of both parts in their bases.
struct Splitting {
    sign: f64,
    first: usize,
    second: usize,
}

fn splittings(subset: &[usize], p: usize, basis_p: &SubsetBasis, basis_q: &SubsetBasis) -> Vec<Splitting> {
    (0..subset.len())
        .combinations(p)
        .map(|positions| {
            let first: Vec<usize> = positions.iter().map(|&i| subset[i]).collect();
            let second: Vec<usize> = subset.iter().copied().filter(|v| !first.contains(v)).collect();
            let sign = eps(&first, &second).expect("parts of a subset are disjoint");
            Splitting {
                sign: f64::from(sign),
                first: basis_p.index_of(&first).expect("valid subset"),
                second: basis_q.index_of(&second).expect("valid subset"),
            }
        })
        .collect()
}

/// Induced endomorphism `A ⊓ B` on the `(p+q)`-th exterior power.
///
/// Entry `(a, b)` is `binom(p+q, p)^{-1} Σ eps(a', a'') eps(b', b'') A[a', b'] B[a'', b'']`
/// summed over all splittings `a = a' ⊔ a''`, `b = b' ⊔ b''` with `|a'| = |b'| = p`.
pub fn sqcap(a: &ExteriorMatrix, b: &ExteriorMatrix) -> Result<ExteriorMatrix> {
    if a.m != b.m {
        return Err(Error::invalid(format!(
            "⊓ operands live over different dimensions ({} vs {})",
            a.m, b.m
        )));
    }
    let (m, p, q) = (a.m, a.q, b.q);
    let h = p + q;
    if h > m {
        return Err(Error::invalid(format!("degree {p} + {q} exceeds dimension {m}")));
    }
    let basis_p = SubsetBasis::new(m, p)?;
    let basis_q = SubsetBasis::new(m, q)?;
    let basis_h = SubsetBasis::new(m, h)?;
    let splits: Vec<Vec<Splitting>> = basis_h
        .subsets()
        .iter()
        .map(|s| splittings(s, p, &basis_p, &basis_q))
        .collect();
    let norm = 1.0 / binomial(h, p) as f64;
    let n = basis_h.len();
    let mut entries = DMatrix::zeros(n, n);
    for (i, row_splits) in splits.iter().enumerate() {
        for (j, col_splits) in splits.iter().enumerate() {
            let mut acc = 0.0;
            for rs in row_splits {
                for cs in col_splits {
                    acc += rs.sign * cs.sign * a.entries[(rs.first, cs.first)] * b.entries[(rs.second, cs.second)];
                }
            }
            entries[(i, j)] = acc * norm;
        }
    }
    ExteriorMatrix::from_entries(m, h, entries)
}

/// `trace((Y^{1/2} T Y^{1/2})^[q])`, the `q`-th elementary symmetric function
/// of the eigenvalues of `Y T`.
pub fn trace_sandwich(y: &SymmetricMatrix, t: &SymmetricMatrix, q: usize) -> Result<f64> {
    if y.dim() != t.dim() {
        return Err(Error::invalid("Y and T differ in size"));
    }
    y.require_positive_definite("Y")?;
    let (root, _) = y.sqrt_pair()?;
    let sandwich = &root * t.as_matrix() * &root;
    Ok(exterior_power(&sandwich, q)?.trace())
}

/// `trace_sandwich(y, t, q)` for every `q = 0, .., m`, sharing one square root.
pub fn trace_sandwich_all(y: &SymmetricMatrix, t: &SymmetricMatrix) -> Result<Vec<f64>> {
    if y.dim() != t.dim() {
        return Err(Error::invalid("Y and T differ in size"));
    }
    y.require_positive_definite("Y")?;
    let (root, _) = y.sqrt_pair()?;
    let sandwich = &root * t.as_matrix() * &root;
    (0..=y.dim()).map(|q| Ok(exterior_power(&sandwich, q)?.trace())).collect()
}
