//! Symmetric coupling matrices for spin models on graphs.
//!
//! A [`CouplingMatrix`] is a symmetric matrix with zero diagonal that defines
//! the quadratic interaction of a spin model. Constructors cover the standard
//! ensembles (complete graph, scaled regular graph, scaled Erdős–Rényi graph,
//! a two-block example, file-loaded networks) plus arbitrary symmetric input.
//! Matrices are immutable after construction and safe to share across threads.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::seed::rng_from;
use rand::Rng;

/// Dimension above which `spectrum` switches from a full dense decomposition
/// to power iteration for the operator norm only.
pub const DENSE_EIGEN_CAP: usize = 5000;

/// Matrices with at most this off-diagonal fill, above
/// [`SPARSE_MIN_N`] spins, are stored as adjacency lists.
const SPARSE_MAX_DENSITY: f64 = 0.10;
const SPARSE_MIN_N: usize = 1000;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex {vertex} has degree {found}, expected {expected}")]
    DegreeMismatch {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Which ensemble a matrix was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    CurieWeiss,
    RegularScaled,
    ErScaled,
    Block,
    Custom,
}

#[derive(Debug, Clone)]
enum Backing {
    /// Row-major `n * n` buffer.
    Dense(Vec<f64>),
    /// Per-row neighbor lists `(column, value)`, sorted by column.
    Sparse(Vec<Vec<(u32, f64)>>),
}

/// Symmetric coupling matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    n: usize,
    kind: MatrixKind,
    backing: Backing,
    nonnegative: bool,
}

/// An undirected simple graph with original node identifiers and ±1 labels.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    /// Original file identifiers, indexed by remapped vertex id.
    pub node_ids: Vec<i64>,
    /// Undirected edges as remapped index pairs with `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// Per-vertex label in {-1, +1}.
    pub labels: Vec<i8>,
}

impl LabeledGraph {
    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    /// The labels as a spin configuration.
    pub fn spins(&self) -> crate::gibbs::SpinConfig {
        crate::gibbs::SpinConfig::from_slice(&self.labels)
            .expect("labels are validated at parse time")
    }
}

impl CouplingMatrix {
    /// Complete-graph couplings: every off-diagonal entry equals `1/n`.
    pub fn curie_weiss(n: usize) -> Result<Self, CouplingError> {
        if n < 2 {
            return Err(CouplingError::InvalidSize(format!(
                "complete-graph coupling needs n >= 2, got {n}"
            )));
        }
        let v = 1.0 / n as f64;
        let mut entries = vec![v; n * n];
        for i in 0..n {
            entries[i * n + i] = 0.0;
        }
        Ok(Self {
            n,
            kind: MatrixKind::CurieWeiss,
            backing: Backing::Dense(entries),
            nonnegative: true,
        })
    }

    /// Adjacency of a `degree`-regular graph divided by the degree.
    ///
    /// Every vertex must have degree exactly `degree`; the first offending
    /// vertex is reported otherwise.
    pub fn regular_scaled(
        n: usize,
        edges: &[(usize, usize)],
        degree: usize,
    ) -> Result<Self, CouplingError> {
        if n < 2 {
            return Err(CouplingError::InvalidSize(format!(
                "regular coupling needs n >= 2, got {n}"
            )));
        }
        if degree == 0 {
            return Err(CouplingError::InvalidParameter(
                "degree must be positive".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut degrees = vec![0usize; n];
        for &(u, v) in edges {
            if u == v {
                return Err(CouplingError::InvalidParameter(format!(
                    "self-loop at vertex {u}"
                )));
            }
            if u >= n || v >= n {
                return Err(CouplingError::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(CouplingError::InvalidParameter(format!(
                    "duplicate edge ({u}, {v})"
                )));
            }
            degrees[u] += 1;
            degrees[v] += 1;
        }
        if let Some(vertex) = (0..n).find(|&i| degrees[i] != degree) {
            return Err(CouplingError::DegreeMismatch {
                vertex,
                expected: degree,
                found: degrees[vertex],
            });
        }
        let value = 1.0 / degree as f64;
        let pairs: Vec<(usize, usize)> = seen.into_iter().collect();
        Ok(Self::from_uniform_edges(
            n,
            &pairs,
            value,
            MatrixKind::RegularScaled,
        ))
    }

    /// Erdős–Rényi `G(n, p)` adjacency divided by `n * p`.
    ///
    /// Each of the `n(n-1)/2` possible edges is present independently with
    /// probability `p`; generation is deterministic given `seed`.
    pub fn er_scaled(n: usize, p: f64, seed: u64) -> Result<Self, CouplingError> {
        if n < 2 {
            return Err(CouplingError::InvalidSize(format!(
                "random-graph coupling needs n >= 2, got {n}"
            )));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(CouplingError::InvalidParameter(format!(
                "edge probability must lie in (0, 1], got {p}"
            )));
        }
        let mut rng = rng_from(seed);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        let value = 1.0 / (n as f64 * p);
        Ok(Self::from_uniform_edges(
            n,
            &pairs,
            value,
            MatrixKind::ErScaled,
        ))
    }

    /// Two-block coupling: entries `1/n` inside a block of size `n/2`,
    /// entries `1/sqrt(n)` inside a block of size `sqrt(n)`, zero elsewhere.
    ///
    /// Requires `n/2` and `sqrt(n)` to be integers.
    pub fn block_example(n: usize) -> Result<Self, CouplingError> {
        let root = (n as f64).sqrt().round() as usize;
        if n < 4 || !n.is_multiple_of(2) || root * root != n {
            return Err(CouplingError::InvalidSize(format!(
                "block coupling needs an even perfect square n >= 4, got {n}"
            )));
        }
        let half = n / 2;
        let v1 = 1.0 / n as f64;
        let v2 = 1.0 / (n as f64).sqrt();
        let mut entries = vec![0.0; n * n];
        for i in 0..half {
            for j in 0..half {
                if i != j {
                    entries[i * n + j] = v1;
                }
            }
        }
        for i in half..half + root {
            for j in half..half + root {
                if i != j {
                    entries[i * n + j] = v2;
                }
            }
        }
        Ok(Self {
            n,
            kind: MatrixKind::Block,
            backing: Backing::Dense(entries),
            nonnegative: true,
        })
    }

    /// Arbitrary symmetric coupling from a row-major buffer.
    ///
    /// The buffer must be exactly symmetric with a zero diagonal; entries may
    /// be signed.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Result<Self, CouplingError> {
        if entries.len() != n * n {
            return Err(CouplingError::InvalidSize(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(CouplingError::InvalidParameter(format!(
                    "nonzero diagonal entry at ({i}, {i})"
                )));
            }
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(CouplingError::InvalidParameter(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        let nonnegative = entries.iter().all(|&v| v >= 0.0);
        Ok(Self {
            n,
            kind: MatrixKind::Custom,
            backing: Backing::Dense(entries),
            nonnegative,
        })
    }

    /// Parse an edge-list file and a label file into a labeled graph and the
    /// `1/n`-scaled coupling of its adjacency matrix.
    ///
    /// Edge lines hold two whitespace-separated integer ids; `#` lines and
    /// blank lines are skipped; duplicate edges are collapsed. Label lines
    /// hold an id and a value in {-1, 0, 1}, with 0 mapped to -1. Vertex ids
    /// are remapped to dense indices in order of first appearance in the
    /// edges file, and every endpoint must carry a label.
    pub fn from_edge_list(
        edges_text: &str,
        labels_text: &str,
    ) -> Result<(LabeledGraph, Self), CouplingError> {
        let mut ids: Vec<i64> = Vec::new();
        let mut index_of: HashMap<i64, usize> = HashMap::new();
        let mut first_line: Vec<usize> = Vec::new();
        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();

        for (lineno, raw) in edges_text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(CouplingError::Parse {
                        line,
                        message: format!("expected two node ids, got '{trimmed}'"),
                    })
                }
            };
            let u: i64 = a.parse().map_err(|_| CouplingError::Parse {
                line,
                message: format!("invalid node id '{a}'"),
            })?;
            let v: i64 = b.parse().map_err(|_| CouplingError::Parse {
                line,
                message: format!("invalid node id '{b}'"),
            })?;
            if u == v {
                return Err(CouplingError::Parse {
                    line,
                    message: format!("self-loop at node {u}"),
                });
            }
            let mut idx = |id: i64| -> usize {
                *index_of.entry(id).or_insert_with(|| {
                    ids.push(id);
                    first_line.push(line);
                    ids.len() - 1
                })
            };
            let ui = idx(u);
            let vi = idx(v);
            edge_set.insert((ui.min(vi), ui.max(vi)));
        }

        let mut labels_by_id: HashMap<i64, i8> = HashMap::new();
        for (lineno, raw) in labels_text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(CouplingError::Parse {
                        line,
                        message: format!("expected 'id value', got '{trimmed}'"),
                    })
                }
            };
            let id: i64 = a.parse().map_err(|_| CouplingError::Parse {
                line,
                message: format!("invalid node id '{a}'"),
            })?;
            let value: i64 = b.parse().map_err(|_| CouplingError::Parse {
                line,
                message: format!("invalid label '{b}'"),
            })?;
            let spin: i8 = match value {
                1 => 1,
                0 | -1 => -1,
                other => {
                    return Err(CouplingError::Parse {
                        line,
                        message: format!("label must be -1, 0, or 1, got {other}"),
                    })
                }
            };
            if let Some(prev) = labels_by_id.insert(id, spin) {
                if prev != spin {
                    return Err(CouplingError::Parse {
                        line,
                        message: format!("conflicting label for node {id}"),
                    });
                }
            }
        }

        let n = ids.len();
        let mut labels = Vec::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            match labels_by_id.get(id) {
                Some(&s) => labels.push(s),
                None => {
                    return Err(CouplingError::Parse {
                        line: first_line[i],
                        message: format!("node {id} has no label"),
                    })
                }
            }
        }

        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        let graph = LabeledGraph {
            node_ids: ids,
            edges,
            labels,
        };
        let coupling = Self::from_labeled_graph(&graph);
        Ok((graph, coupling))
    }

    /// The `1/n`-scaled adjacency coupling of a labeled graph.
    pub fn from_labeled_graph(graph: &LabeledGraph) -> Self {
        let n = graph.n();
        let value = if n > 0 { 1.0 / n as f64 } else { 0.0 };
        Self::from_uniform_edges(n, &graph.edges, value, MatrixKind::Custom)
    }

    /// Rescale every entry by `c`. The result is tagged [`MatrixKind::Custom`].
    pub fn scaled(&self, c: f64) -> Self {
        let backing = match &self.backing {
            Backing::Dense(e) => Backing::Dense(e.iter().map(|v| v * c).collect()),
            Backing::Sparse(rows) => Backing::Sparse(
                rows.iter()
                    .map(|r| r.iter().map(|&(j, v)| (j, v * c)).collect())
                    .collect(),
            ),
        };
        Self {
            n: self.n,
            kind: MatrixKind::Custom,
            backing,
            nonnegative: self.nonnegative && c >= 0.0,
        }
    }

    fn from_uniform_edges(
        n: usize,
        pairs: &[(usize, usize)],
        value: f64,
        kind: MatrixKind,
    ) -> Self {
        let max_pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
        let density = if max_pairs == 0 {
            0.0
        } else {
            pairs.len() as f64 / max_pairs as f64
        };
        let backing = if n > SPARSE_MIN_N && density <= SPARSE_MAX_DENSITY {
            let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
            for &(i, j) in pairs {
                rows[i].push((j as u32, value));
                rows[j].push((i as u32, value));
            }
            for row in &mut rows {
                row.sort_unstable_by_key(|&(j, _)| j);
            }
            Backing::Sparse(rows)
        } else {
            let mut entries = vec![0.0; n * n];
            for &(i, j) in pairs {
                entries[i * n + j] = value;
                entries[j * n + i] = value;
            }
            Backing::Dense(entries)
        };
        Self {
            n,
            kind,
            backing,
            nonnegative: value >= 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.backing, Backing::Sparse(_))
    }

    /// Whether every entry is non-negative.
    pub fn nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index out of range");
        match &self.backing {
            Backing::Dense(e) => e[i * self.n + j],
            Backing::Sparse(rows) => rows[i]
                .binary_search_by_key(&(j as u32), |&(c, _)| c)
                .map(|k| rows[i][k].1)
                .unwrap_or(0.0),
        }
    }

    /// Apply `f` to every stored off-diagonal pair `i < j` with its value.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize, f64)) {
        match &self.backing {
            Backing::Dense(e) => {
                for i in 0..self.n {
                    for j in (i + 1)..self.n {
                        let v = e[i * self.n + j];
                        if v != 0.0 {
                            f(i, j, v);
                        }
                    }
                }
            }
            Backing::Sparse(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    for &(j, v) in row {
                        if (j as usize) > i {
                            f(i, j as usize, v);
                        }
                    }
                }
            }
        }
    }

    /// Matrix-vector product `J x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        match &self.backing {
            Backing::Dense(e) => (0..self.n)
                .map(|i| {
                    let row = &e[i * self.n..(i + 1) * self.n];
                    row.iter().zip(x).map(|(a, b)| a * b).sum()
                })
                .collect(),
            Backing::Sparse(rows) => rows
                .iter()
                .map(|row| row.iter().map(|&(j, v)| v * x[j as usize]).sum())
                .collect(),
        }
    }

    /// Local fields `m_i = sum_j J(i, j) s_j` for a ±1 spin vector.
    pub fn mul_spins(&self, spins: &[i8]) -> Vec<f64> {
        assert_eq!(spins.len(), self.n, "dimension mismatch");
        match &self.backing {
            Backing::Dense(e) => {
                let x: Vec<f64> = spins.iter().map(|&s| s as f64).collect();
                (0..self.n)
                    .map(|i| {
                        let row = &e[i * self.n..(i + 1) * self.n];
                        row.iter().zip(&x).map(|(a, b)| a * b).sum()
                    })
                    .collect()
            }
            Backing::Sparse(rows) => rows
                .iter()
                .map(|row| row.iter().map(|&(j, v)| v * spins[j as usize] as f64).sum())
                .collect(),
        }
    }

    /// Add `delta * J(:, j)` into `acc`, skipping the (zero) diagonal.
    ///
    /// This is the O(degree) update that keeps local fields current when a
    /// single spin flips.
    pub(crate) fn axpy_column(&self, j: usize, delta: f64, acc: &mut [f64]) {
        match &self.backing {
            Backing::Dense(e) => {
                let row = &e[j * self.n..(j + 1) * self.n];
                for (a, &v) in acc.iter_mut().zip(row) {
                    *a += delta * v;
                }
            }
            Backing::Sparse(rows) => {
                for &(i, v) in &rows[j] {
                    acc[i as usize] += delta * v;
                }
            }
        }
    }

    /// Squared Frobenius norm over the full (ordered) index set.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let mut sum = 0.0;
        self.for_each_edge(|_, _, v| sum += 2.0 * v * v);
        sum
    }

    /// Sum of all entries over the full (ordered) index set.
    pub fn entry_sum(&self) -> f64 {
        let mut sum = 0.0;
        self.for_each_edge(|_, _, v| sum += 2.0 * v);
        sum
    }

    pub(crate) fn to_dense_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        match &self.backing {
            Backing::Dense(e) => DMatrix::from_fn(n, n, |i, j| e[i * n + j]),
            Backing::Sparse(_) => {
                let mut m = DMatrix::zeros(n, n);
                self.for_each_edge(|i, j, v| {
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                });
                m
            }
        }
    }

    /// Eigenvalue summary of the matrix.
    ///
    /// Up to [`DENSE_EIGEN_CAP`] spins this is the full symmetric
    /// decomposition; above the cap only the operator norm is computed, by
    /// power iteration, and the result is flagged partial.
    pub fn spectrum(&self) -> Spectrum {
        self.spectrum_with_cap(DENSE_EIGEN_CAP)
    }

    pub fn spectrum_with_cap(&self, cap: usize) -> Spectrum {
        let frob = self.frobenius_norm_sq();
        if self.n == 0 {
            return Spectrum {
                eigenvalues: Vec::new(),
                frobenius_norm_sq: 0.0,
                operator_norm: 0.0,
                partial: false,
            };
        }
        if self.n <= cap {
            let eig = self.to_dense_matrix().symmetric_eigenvalues();
            let mut eigenvalues: Vec<f64> = eig.iter().copied().collect();
            eigenvalues.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
            let operator_norm = eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
            Spectrum {
                eigenvalues,
                frobenius_norm_sq: frob,
                operator_norm,
                partial: false,
            }
        } else {
            Spectrum {
                eigenvalues: Vec::new(),
                frobenius_norm_sq: frob,
                operator_norm: self.operator_norm_power(),
                partial: true,
            }
        }
    }

    /// Operator norm by power iteration on `J^2`.
    ///
    /// Iterating on the square sidesteps sign oscillation when the extreme
    /// eigenvalues are `±lambda`. Tolerance 1e-10, at most 10^4 iterations.
    fn operator_norm_power(&self) -> f64 {
        let n = self.n;
        let mut rng = rng_from(0x9d2c_5681_u64 ^ n as u64);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|a| *a /= nv);
        let mut estimate = 0.0f64;
        for _ in 0..10_000 {
            let jv = self.matvec(&v);
            let new_estimate = norm(&jv);
            if new_estimate == 0.0 {
                return 0.0;
            }
            let jjv = self.matvec(&jv);
            let njjv = norm(&jjv);
            if njjv == 0.0 {
                return new_estimate;
            }
            v = jjv.iter().map(|a| a / njjv).collect();
            if (new_estimate - estimate).abs() <= 1e-10 * new_estimate.max(1.0) {
                return new_estimate;
            }
            estimate = new_estimate;
        }
        estimate
    }
}

/// Eigenvalue summary produced by [`CouplingMatrix::spectrum`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in descending order (empty in partial mode).
    pub eigenvalues: Vec<f64>,
    /// Squared Frobenius norm of the matrix.
    pub frobenius_norm_sq: f64,
    /// Largest absolute eigenvalue.
    pub operator_norm: f64,
    /// True when only the operator norm was computed.
    pub partial: bool,
}

/// Edges of a circulant `degree`-regular graph on `n` vertices.
///
/// Vertex `i` is joined to `i ± k (mod n)` for `k = 1..=degree/2`. Requires
/// an even degree below `n`.
pub fn circulant_edges(n: usize, degree: usize) -> Result<Vec<(usize, usize)>, CouplingError> {
    if degree == 0 || !degree.is_multiple_of(2) || degree >= n {
        return Err(CouplingError::InvalidParameter(format!(
            "circulant graph needs an even degree in [2, n), got degree {degree} with n = {n}"
        )));
    }
    let mut edges = Vec::with_capacity(n * degree / 2);
    for i in 0..n {
        for k in 1..=degree / 2 {
            edges.push((i, (i + k) % n));
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_basic_invariants(j: &CouplingMatrix) {
        let n = j.n();
        for i in 0..n {
            assert_eq!(j.entry(i, i), 0.0, "diagonal must be zero");
            for k in 0..n {
                assert_eq!(j.entry(i, k), j.entry(k, i), "must be symmetric");
                if j.kind() != MatrixKind::Custom {
                    assert!(j.entry(i, k) >= 0.0, "named kinds are non-negative");
                }
            }
        }
    }

    #[test]
    fn curie_weiss_small() {
        let j = CouplingMatrix::curie_weiss(2).unwrap();
        assert_eq!(j.entry(0, 1), 0.5);
        assert_eq!(j.entry(1, 0), 0.5);
        check_basic_invariants(&j);

        let j3 = CouplingMatrix::curie_weiss(3).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                if i != k {
                    assert_eq!(j3.entry(i, k), 1.0 / 3.0);
                }
            }
        }
        assert!(matches!(
            CouplingMatrix::curie_weiss(1),
            Err(CouplingError::InvalidSize(_))
        ));
    }

    #[test]
    fn curie_weiss_operator_norm() {
        // top eigenvalue of (ones - I)/n is (n-1)/n
        let j = CouplingMatrix::curie_weiss(10).unwrap();
        let spec = j.spectrum();
        assert!((spec.operator_norm - 0.9).abs() < 1e-10);
        assert!((spec.eigenvalues[0] - 0.9).abs() < 1e-10);
        for lam in &spec.eigenvalues[1..] {
            assert!((lam + 0.1).abs() < 1e-10);
        }
    }

    #[test]
    fn regular_scaled_cycle() {
        let edges = circulant_edges(4, 2).unwrap();
        let j = CouplingMatrix::regular_scaled(4, &edges, 2).unwrap();
        for i in 0..4 {
            assert_eq!(j.entry(i, (i + 1) % 4), 0.5);
            assert_eq!(j.entry(i, (i + 3) % 4), 0.5);
            assert_eq!(j.entry(i, (i + 2) % 4), 0.0);
        }
        check_basic_invariants(&j);
    }

    #[test]
    fn regular_scaled_complete_graph() {
        let n = 7;
        let mut edges = Vec::new();
        for i in 0..n {
            for k in (i + 1)..n {
                edges.push((i, k));
            }
        }
        let j = CouplingMatrix::regular_scaled(n, &edges, n - 1).unwrap();
        assert!((j.entry(0, 1) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn regular_scaled_rejects_non_regular() {
        // path graph: endpoints have degree 1
        let err = CouplingMatrix::regular_scaled(3, &[(0, 1), (1, 2)], 2).unwrap_err();
        match err {
            CouplingError::DegreeMismatch {
                vertex,
                expected,
                found,
            } => {
                assert_eq!(vertex, 0);
                assert_eq!(expected, 2);
                assert_eq!(found, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn six_cycle_operator_norm_is_one() {
        let edges = circulant_edges(6, 2).unwrap();
        let j = CouplingMatrix::regular_scaled(6, &edges, 2).unwrap();
        let spec = j.spectrum();
        assert!((spec.operator_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn er_with_p_one_matches_curie_weiss() {
        let j = CouplingMatrix::er_scaled(9, 1.0, 3).unwrap();
        let cw = CouplingMatrix::curie_weiss(9).unwrap();
        for i in 0..9 {
            for k in 0..9 {
                assert_eq!(j.entry(i, k), cw.entry(i, k));
            }
        }
    }

    #[test]
    fn er_edge_count_within_binomial_range() {
        let n = 1000;
        let p = 0.2;
        let j = CouplingMatrix::er_scaled(n, p, 42).unwrap();
        let mut edges = 0usize;
        j.for_each_edge(|_, _, _| edges += 1);
        let pairs = (n * (n - 1) / 2) as f64;
        let mean = pairs * p;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        assert!(
            (edges as f64 - mean).abs() < 4.0 * sd,
            "edge count {edges} outside 4 sd of {mean}"
        );
        // determinism
        let j2 = CouplingMatrix::er_scaled(n, p, 42).unwrap();
        let mut edges2 = 0usize;
        j2.for_each_edge(|_, _, _| edges2 += 1);
        assert_eq!(edges, edges2);
    }

    #[test]
    fn er_operator_norm_near_one() {
        let j = CouplingMatrix::er_scaled(500, 0.3, 11).unwrap();
        let spec = j.spectrum();
        assert!(
            (spec.operator_norm - 1.0).abs() < 0.1,
            "operator norm {} not within 10% of 1",
            spec.operator_norm
        );
        assert!(matches!(
            CouplingMatrix::er_scaled(10, 0.0, 1),
            Err(CouplingError::InvalidParameter(_))
        ));
        assert!(matches!(
            CouplingMatrix::er_scaled(10, 1.5, 1),
            Err(CouplingError::InvalidParameter(_))
        ));
    }

    #[test]
    fn block_example_smallest_case() {
        let j = CouplingMatrix::block_example(4).unwrap();
        assert_eq!(j.entry(0, 1), 0.25);
        assert_eq!(j.entry(2, 3), 0.5);
        assert_eq!(j.entry(0, 2), 0.0);
        assert_eq!(j.entry(1, 3), 0.0);
        check_basic_invariants(&j);
    }

    #[test]
    fn block_example_frobenius() {
        // 8*7 ordered pairs at 1/256 plus 4*3 ordered pairs at 1/16
        let j = CouplingMatrix::block_example(16).unwrap();
        let expected = 56.0 / 256.0 + 12.0 / 16.0;
        assert!((j.frobenius_norm_sq() - expected).abs() < 1e-12);
    }

    #[test]
    fn block_example_operator_norm() {
        let j = CouplingMatrix::block_example(100).unwrap();
        let spec = j.spectrum();
        assert!((spec.operator_norm - 0.9).abs() < 1e-10);
        assert!(matches!(
            CouplingMatrix::block_example(18),
            Err(CouplingError::InvalidSize(_))
        ));
        assert!(matches!(
            CouplingMatrix::block_example(25),
            Err(CouplingError::InvalidSize(_))
        ));
    }

    #[test]
    fn edge_list_path_graph() {
        let (graph, j) = CouplingMatrix::from_edge_list("1 2\n2 3\n", "1 1\n2 1\n3 1\n").unwrap();
        assert_eq!(graph.n(), 3);
        assert_eq!(graph.edges, vec![(0, 1), (1, 2)]);
        assert_eq!(graph.labels, vec![1, 1, 1]);
        assert!((j.entry(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((j.entry(1, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(j.entry(0, 2), 0.0);
    }

    #[test]
    fn edge_list_deduplicates_and_skips_comments() {
        let (graph, _) = CouplingMatrix::from_edge_list(
            "# comment\n1 2\n2 1\n\n1 2\n",
            "1 0\n2 1\n# trailing comment\n",
        )
        .unwrap();
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(graph.labels, vec![-1, 1]);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = CouplingMatrix::from_edge_list("1 2\n3 3\n", "1 1\n2 1\n3 1\n").unwrap_err();
        match err {
            CouplingError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("self-loop"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        let err = CouplingMatrix::from_edge_list("1 2\n2 3\n", "1 1\n2 1\n").unwrap_err();
        match err {
            CouplingError::Parse { line, message } => {
                assert_eq!(line, 2, "unlabeled node 3 first appears on line 2");
                assert!(message.contains("no label"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        let err = CouplingMatrix::from_edge_list("1 2 3\n", "1 1\n2 1\n").unwrap_err();
        assert!(matches!(err, CouplingError::Parse { line: 1, .. }));

        let err = CouplingMatrix::from_edge_list("1 2\n", "1 7\n2 1\n").unwrap_err();
        assert!(matches!(err, CouplingError::Parse { line: 1, .. }));
    }

    #[test]
    fn edge_list_permutation_gives_isomorphic_graph() {
        let text_a = "10 20\n20 30\n30 40\n10 30\n";
        let text_b = "30 40\n10 30\n10 20\n20 30\n";
        let labels = "10 1\n20 0\n30 1\n40 0\n";
        let (ga, ja) = CouplingMatrix::from_edge_list(text_a, labels).unwrap();
        let (gb, jb) = CouplingMatrix::from_edge_list(text_b, labels).unwrap();
        let id_edges = |g: &LabeledGraph| -> BTreeSet<(i64, i64)> {
            g.edges
                .iter()
                .map(|&(u, v)| {
                    let a = g.node_ids[u];
                    let b = g.node_ids[v];
                    (a.min(b), a.max(b))
                })
                .collect()
        };
        assert_eq!(id_edges(&ga), id_edges(&gb));
        assert_eq!(ja.frobenius_norm_sq(), jb.frobenius_norm_sq());
    }

    #[test]
    fn empty_edge_file_gives_degenerate_graph() {
        let (graph, j) = CouplingMatrix::from_edge_list("# nothing\n", "1 1\n").unwrap();
        assert_eq!(graph.n(), 0);
        assert_eq!(j.n(), 0);
    }

    #[test]
    fn spectrum_closed_forms() {
        let j = CouplingMatrix::curie_weiss(2).unwrap();
        let spec = j.spectrum();
        assert!((spec.eigenvalues[0] - 0.5).abs() < 1e-12);
        assert!((spec.eigenvalues[1] + 0.5).abs() < 1e-12);

        let zero = CouplingMatrix::from_dense(4, vec![0.0; 16]).unwrap();
        for lam in &zero.spectrum().eigenvalues {
            assert_eq!(*lam, 0.0);
        }
    }

    #[test]
    fn spectrum_trace_and_frobenius_identities() {
        let seeds = [1u64, 2, 3];
        let mut matrices = vec![
            CouplingMatrix::curie_weiss(50).unwrap(),
            CouplingMatrix::block_example(64).unwrap(),
        ];
        for &s in &seeds {
            matrices.push(CouplingMatrix::er_scaled(120, 0.25, s).unwrap());
        }
        for j in &matrices {
            let spec = j.spectrum();
            let n = j.n() as f64;
            let trace: f64 = spec.eigenvalues.iter().sum();
            assert!(trace.abs() <= 1e-8 * n, "trace {trace} too large");
            let sq: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
            let frob = spec.frobenius_norm_sq;
            assert!((sq - frob).abs() <= 1e-8 * frob.max(1e-30));
            let max_abs = spec
                .eigenvalues
                .iter()
                .fold(0.0f64, |acc, &l| acc.max(l.abs()));
            assert!((max_abs - spec.operator_norm).abs() < 1e-12);
        }
    }

    #[test]
    fn power_iteration_matches_dense_norm() {
        for (j, tol) in [
            (CouplingMatrix::curie_weiss(40).unwrap(), 1e-8),
            (CouplingMatrix::er_scaled(150, 0.2, 5).unwrap(), 1e-6),
            (CouplingMatrix::block_example(36).unwrap(), 1e-8),
        ] {
            let dense = j.spectrum();
            let partial = j.spectrum_with_cap(1);
            assert!(partial.partial);
            assert!(partial.eigenvalues.is_empty());
            assert!(
                (dense.operator_norm - partial.operator_norm).abs()
                    <= tol * dense.operator_norm.max(1.0),
                "power iteration {} vs dense {}",
                partial.operator_norm,
                dense.operator_norm
            );
        }
    }

    #[test]
    fn sparse_backing_kicks_in_for_large_sparse_graphs() {
        let j = CouplingMatrix::er_scaled(1200, 0.01, 9).unwrap();
        assert!(j.is_sparse());
        let dense = CouplingMatrix::curie_weiss(1200).unwrap();
        assert!(!dense.is_sparse());
        // sparse and dense agree on products
        let x: Vec<f64> = (0..1200).map(|i| (i % 7) as f64 - 3.0).collect();
        let y = j.matvec(&x);
        let mut y_ref = vec![0.0; 1200];
        j.for_each_edge(|a, b, v| {
            y_ref[a] += v * x[b];
            y_ref[b] += v * x[a];
        });
        for (a, b) in y.iter().zip(&y_ref) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn from_dense_validates() {
        assert!(matches!(
            CouplingMatrix::from_dense(2, vec![0.0, 1.0, 2.0, 0.0]),
            Err(CouplingError::InvalidParameter(_))
        ));
        assert!(matches!(
            CouplingMatrix::from_dense(2, vec![1.0, 0.5, 0.5, 0.0]),
            Err(CouplingError::InvalidParameter(_))
        ));
        let j = CouplingMatrix::from_dense(2, vec![0.0, -0.5, -0.5, 0.0]).unwrap();
        assert!(!j.nonnegative());
    }
}
