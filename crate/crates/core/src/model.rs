//! Node orderings, strictly lower-triangular weight matrices, and the
//! composition `G = P T Pᵀ` that links them to DAG weight matrices.
//!
//! Weight matrices are oriented row = parent, column = child: `G[[i, j]]`
//! is the weight of the edge `i -> j`. Node indices are 0-based in memory
//! and 1-based in every external format.
//!
//! A [`Permutation`] is stored as its rank vector: entry `k` is the node
//! placed at rank position `k`, which is also the row holding the single
//! nonzero of column `k` in the 0/1 matrix form. Ordering positions run
//! from sinks to sources, so every edge of `compose(perm, t)` points from a
//! later rank position to an earlier one.

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};

/// A node ordering stored as a rank vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    ranks: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from a 0-based rank vector.
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        let p = ranks.len();
        if p == 0 {
            return Err(Error::InvalidPermutation("empty rank vector".into()));
        }
        let mut seen = vec![false; p];
        for &r in &ranks {
            if r >= p {
                return Err(Error::InvalidPermutation(format!(
                    "value {} out of range 1..={p}",
                    r + 1
                )));
            }
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::InvalidPermutation(format!(
                    "value {} appears more than once",
                    r + 1
                )));
            }
        }
        Ok(Self { ranks })
    }

    /// Builds a permutation from the 1-based rank vector used in external formats.
    pub fn from_one_based(ranks: &[usize]) -> Result<Self> {
        if ranks.contains(&0) {
            return Err(Error::InvalidPermutation(
                "value 0 in 1-based rank vector".into(),
            ));
        }
        Self::new(ranks.iter().map(|r| r - 1).collect())
    }

    pub fn identity(p: usize) -> Self {
        Self {
            ranks: (0..p).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// The 0-based rank vector.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.ranks.iter().map(|r| r + 1).collect()
    }

    /// `positions()[node]` is the rank position of `node`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.ranks.len()];
        for (k, &node) in self.ranks.iter().enumerate() {
            pos[node] = k;
        }
        pos
    }

    /// The 0/1 permutation matrix: column `k` has its single 1 in row `ranks[k]`.
    pub fn to_matrix(&self) -> Array2<f64> {
        let p = self.ranks.len();
        let mut m = Array2::zeros((p, p));
        for (k, &node) in self.ranks.iter().enumerate() {
            m[[node, k]] = 1.0;
        }
        m
    }

    /// Inverse of [`Permutation::to_matrix`]; reads the nonzero row of each column.
    pub fn from_matrix(m: &Array2<f64>) -> Result<Self> {
        let (rows, cols) = m.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        let mut ranks = Vec::with_capacity(cols);
        for k in 0..cols {
            let mut hit = None;
            for i in 0..rows {
                let v = m[[i, k]];
                if v == 1.0 && hit.is_none() {
                    hit = Some(i);
                } else if v != 0.0 {
                    return Err(Error::InvalidPermutation(format!(
                        "column {} is not a unit vector",
                        k + 1
                    )));
                }
            }
            ranks.push(hit.ok_or_else(|| {
                Error::InvalidPermutation(format!("column {} has no nonzero entry", k + 1))
            })?);
        }
        Self::new(ranks)
    }

    /// Swaps the genes at rank positions `idx` and `idx + 1`.
    pub fn swap_adjacent(&mut self, idx: usize) {
        self.ranks.swap(idx, idx + 1);
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.ranks.iter().map(|r| (r + 1).to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Square matrix with zero diagonal and zero upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictLowerTriangular {
    entries: Array2<f64>,
}

impl StrictLowerTriangular {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        for i in 0..rows {
            for j in i..cols {
                if entries[[i, j]] != 0.0 {
                    return Err(Error::NotStrictlyLower { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            entries: Array2::zeros((p, p)),
        }
    }

    /// Caller guarantees the strict lower-triangular pattern.
    pub(crate) fn from_raw(entries: Array2<f64>) -> Self {
        debug_assert!(Self::new(entries.clone()).is_ok());
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.entries
    }

    /// Sum of absolute values.
    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|v| **v != 0.0).count()
    }
}

/// A directed edge `source -> target` with 0-based node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Weight matrix of a DAG, `weights[[i, j]]` being the weight of `i -> j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDag {
    weights: Array2<f64>,
}

impl WeightedDag {
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        if !is_dag(&weights) {
            return Err(Error::CyclicGraph);
        }
        Ok(Self { weights })
    }

    pub fn empty(p: usize) -> Self {
        Self {
            weights: Array2::zeros((p, p)),
        }
    }

    /// Builds the weight matrix from 0-based edges. Repeated pairs are rejected.
    pub fn from_edges(p: usize, edges: &[Edge]) -> Result<Self> {
        let mut weights = Array2::zeros((p, p));
        for e in edges {
            if e.source >= p || e.target >= p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: e.source.max(e.target) + 1,
                });
            }
            if weights[[e.source, e.target]] != 0.0 {
                return Err(Error::InvalidDataset(format!(
                    "edge {} -> {} listed twice",
                    e.source + 1,
                    e.target + 1
                )));
            }
            weights[[e.source, e.target]] = e.weight;
        }
        Self::new(weights)
    }

    pub fn p(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Nonzero entries in row-major order.
    pub fn edges(&self) -> Vec<Edge> {
        self.weights
            .indexed_iter()
            .filter(|(_, w)| **w != 0.0)
            .map(|((source, target), &weight)| Edge {
                source,
                target,
                weight,
            })
            .collect()
    }

    pub fn n_edges(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }
}

/// Returns the 0/1 matrix form of `perm`.
pub fn permutation_to_matrix(perm: &Permutation) -> Array2<f64> {
    perm.to_matrix()
}

pub fn matrix_to_permutation(m: &Array2<f64>) -> Result<Permutation> {
    Permutation::from_matrix(m)
}

/// `G = P T Pᵀ`, evaluated by index relabeling: `G[ranks[k], ranks[l]] = T[k, l]`.
pub fn compose(perm: &Permutation, tri: &StrictLowerTriangular) -> Result<WeightedDag> {
    let p = perm.len();
    if tri.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: tri.dim(),
        });
    }
    let ranks = perm.ranks();
    let t = tri.entries();
    let mut g = Array2::zeros((p, p));
    for k in 0..p {
        for l in 0..k {
            g[[ranks[k], ranks[l]]] = t[[k, l]];
        }
    }
    Ok(WeightedDag { weights: g })
}

/// Splits an acyclic weight matrix into an ordering and a strictly lower
/// triangular matrix with `compose(perm, tri) == g`.
///
/// Nodes are peeled Kahn-style from the sink end, always taking the lowest
/// available node index, and written into the rank vector front to back.
/// The empty graph therefore decomposes with the identity ordering.
pub fn decompose(g: &WeightedDag) -> Result<(Permutation, StrictLowerTriangular)> {
    let w = g.weights();
    let ranks = peel_sinks(w).ok_or(Error::CyclicGraph)?;
    let p = ranks.len();
    let mut t = Array2::zeros((p, p));
    for k in 0..p {
        for l in 0..p {
            t[[k, l]] = w[[ranks[k], ranks[l]]];
        }
    }
    let tri = StrictLowerTriangular::new(t)?;
    Ok((Permutation::new(ranks)?, tri))
}

/// True iff the nonzero pattern of `m` admits a topological order.
/// Self-loops make a matrix cyclic.
pub fn is_dag(m: &Array2<f64>) -> bool {
    m.nrows() == m.ncols() && peel_sinks(m).is_some()
}

/// Children-first order with lowest-index tie-break, or `None` on a cycle.
fn peel_sinks(m: &Array2<f64>) -> Option<Vec<usize>> {
    let p = m.nrows();
    let mut outdegree = vec![0usize; p];
    for ((i, _), w) in m.indexed_iter() {
        if *w != 0.0 {
            outdegree[i] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..p).filter(|&i| outdegree[i] == 0).collect();
    let mut order = Vec::with_capacity(p);
    while let Some(node) = ready.pop_first() {
        order.push(node);
        for i in 0..p {
            if m[[i, node]] != 0.0 {
                outdegree[i] -= 1;
                if outdegree[i] == 0 {
                    ready.insert(i);
                }
            }
        }
    }
    (order.len() == p).then_some(order)
}

/// Observation matrix: rows are samples, columns are nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    names: Vec<String>,
}

impl Dataset {
    /// Wraps `x` with default node names `V1..Vp`.
    pub fn new(x: Array2<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("V{j}")).collect();
        Self::with_names(x, names)
    }

    pub fn with_names(x: Array2<f64>, names: Vec<String>) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 1 {
            return Err(Error::InvalidDataset(
                "need at least one observation".into(),
            ));
        }
        if p < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 nodes, got {p}"
            )));
        }
        if names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: names.len(),
            });
        }
        if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value {v} at row {}, column {}",
                i + 1,
                j + 1
            )));
        }
        Ok(Self { x, names })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}
