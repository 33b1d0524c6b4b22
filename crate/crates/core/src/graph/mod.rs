//! Simple undirected graphs with canonical pair indexing.
//!
//! Vertices are `0..n`; edges are unordered pairs stored as `(u, v)` with
//! `u < v`, kept sorted lexicographically. Every potential edge has a
//! canonical pair index in `0..n(n-1)/2`, and all sampling matrices and
//! Gaussian streams index against that order, so sketches are reproducible
//! across runs and components.

mod io;

pub use io::{load_graph, save_graph, GraphFormat};

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;
use nalgebra::DMatrix;
use std::collections::VecDeque;

/// Number of vertex pairs over `n` vertices.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * (n.saturating_sub(1)) / 2
}

/// Canonical index of the pair `(u, v)`, `u < v`, in lexicographic order.
#[inline]
pub fn pair_index(u: u32, v: u32, n: usize) -> u64 {
    debug_assert!((u as usize) < n && (v as usize) < n && u < v);
    let (u, v, n) = (u as u64, v as u64, n as u64);
    // offset(u) = u*(n-1) - u*(u-1)/2 pairs precede those starting at u.
    u * (n - 1) - u * (u.saturating_sub(1)) / 2 + (v - u - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_unindex(index: u64, n: usize) -> (u32, u32) {
    debug_assert!(index < pair_count(n));
    let nn = n as u64;
    let offset = |u: u64| u * (nn - 1) - u * (u.saturating_sub(1)) / 2;
    // Largest u with offset(u) <= index.
    let (mut lo, mut hi) = (0u64, nn - 1);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if offset(mid) <= index {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let u = lo;
    let v = u + 1 + (index - offset(u));
    (u as u32, v as u32)
}

/// A row of the signed edge-incidence matrix: +1 at the smaller endpoint's
/// column, -1 at the larger. Rows whose pair is not an edge are all-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedIncidenceRow {
    pub pair: u64,
    pub plus_col: u32,
    pub minus_col: u32,
}

/// Immutable simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a graph, validating simplicity: endpoints in range, no
    /// self-loops, no duplicates. Edges are normalized to `u < v` and sorted.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Graph> {
        let mut normalized: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::contract(format!("self-loop ({a},{a})")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::contract(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::contract(format!(
                "duplicate edge ({},{})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        Ok(Graph {
            n,
            edges: normalized,
            adjacency,
        })
    }

    pub fn empty(n: usize) -> Graph {
        Graph::new(n, []).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::with_capacity(pair_count(n) as usize);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n as u32).map(|v| (v - 1, v))).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted lexicographically with `u < v`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// vol(V) = sum of degrees = 2m.
    pub fn volume(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn volume_of(&self, set: &[u32]) -> usize {
        set.iter().map(|&v| self.degree(v)).sum()
    }

    pub fn pair_index_of(&self, u: u32, v: u32) -> u64 {
        pair_index(u.min(v), u.max(v), self.n)
    }

    /// Exact hop distance via BFS; `None` when unreachable.
    pub fn bfs_distance(&self, u: u32, v: u32) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        let dist = self.bfs_from(u);
        dist[v as usize]
    }

    /// BFS distances from `source` to every vertex.
    pub fn bfs_from(&self, source: u32) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source as usize] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize].unwrap();
            for &y in self.neighbors(x) {
                if dist[y as usize].is_none() {
                    dist[y as usize] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Edge-set intersection; both graphs must share `n`.
    pub fn intersect(&self, other: &Graph) -> Result<Graph> {
        if self.n != other.n {
            return Err(Error::contract(format!(
                "intersect: vertex counts differ ({} vs {})",
                self.n, other.n
            )));
        }
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| other.has_edge(u, v))
            .collect::<Vec<_>>();
        Graph::new(self.n, edges)
    }

    /// `G + e` with set semantics: adding an existing edge is the identity.
    pub fn with_edge(&self, u: u32, v: u32) -> Result<Graph> {
        if self.has_edge(u, v) {
            return Ok(self.clone());
        }
        let mut edges = self.edges.clone();
        edges.push((u.min(v), u.max(v)));
        Graph::new(self.n, edges)
    }

    pub fn without_edge(&self, u: u32, v: u32) -> Graph {
        let key = (u.min(v), u.max(v));
        Graph::new(self.n, self.edges.iter().copied().filter(|&e| e != key)).unwrap()
    }

    /// Induced subgraph on `verts`, relabeled to `0..verts.len()` following
    /// the order of `verts` (which must be sorted and duplicate-free).
    pub fn compact_subgraph(&self, verts: &[u32]) -> Graph {
        debug_assert!(verts.windows(2).all(|w| w[0] < w[1]));
        let mut local = vec![u32::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        Graph::new(
            verts.len(),
            self.edges.iter().filter_map(|&(u, v)| {
                let (lu, lv) = (local[u as usize], local[v as usize]);
                (lu != u32::MAX && lv != u32::MAX).then_some((lu, lv))
            }),
        )
        .unwrap()
    }

    /// Induced subgraph on the kept vertices; labels are preserved (the
    /// vertex universe stays `0..n`, dropped vertices become isolated).
    pub fn induced(&self, keep: &[bool]) -> Graph {
        assert_eq!(keep.len(), self.n);
        Graph::new(
            self.n,
            self.edges
                .iter()
                .copied()
                .filter(|&(u, v)| keep[u as usize] && keep[v as usize]),
        )
        .unwrap()
    }

    pub fn union_find(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.n);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf
    }

    /// (component count, per-vertex component label).
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut uf = self.union_find();
        (uf.component_count(), uf.labels())
    }

    /// Vertices with nonzero degree, ascending.
    pub fn positive_degree_vertices(&self) -> Vec<u32> {
        (0..self.n as u32).filter(|&v| self.degree(v) > 0).collect()
    }

    /// Iterator over the nonzero rows of the signed edge-incidence matrix,
    /// in pair-index order.
    pub fn incidence_rows(&self) -> impl Iterator<Item = SignedIncidenceRow> + '_ {
        self.edges.iter().map(|&(u, v)| SignedIncidenceRow {
            pair: pair_index(u, v, self.n),
            plus_col: u,
            minus_col: v,
        })
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u as usize, v as usize)] = 1.0;
            a[(v as usize, u as usize)] = 1.0;
        }
        a
    }

    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.n,
            self.adjacency.iter().map(|a| a.len() as f64),
        ))
    }

    /// Dense signed edge-incidence matrix, n-choose-2 rows by n columns.
    /// Only sensible at small n; production paths use [`incidence_rows`].
    ///
    /// [`incidence_rows`]: Graph::incidence_rows
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let rows = pair_count(self.n) as usize;
        let mut b = DMatrix::zeros(rows, self.n);
        for row in self.incidence_rows() {
            b[(row.pair as usize, row.plus_col as usize)] = 1.0;
            b[(row.pair as usize, row.minus_col as usize)] = -1.0;
        }
        b
    }

    /// Laplacian L = sum of b_e b_e^T = D - A.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            let (u, v) = (u as usize, v as usize);
            l[(u, u)] += 1.0;
            l[(v, v)] += 1.0;
            l[(u, v)] -= 1.0;
            l[(v, u)] -= 1.0;
        }
        l
    }

    /// Normalized Laplacian restricted to the degree-positive vertex set
    /// (D^{-1/2} is undefined at zero degree). Returns the matrix and the
    /// vertices its rows correspond to.
    pub fn normalized_laplacian(&self) -> (DMatrix<f64>, Vec<u32>) {
        let verts = self.positive_degree_vertices();
        let k = verts.len();
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            pos[v as usize] = i;
        }
        let inv_sqrt: Vec<f64> = verts
            .iter()
            .map(|&v| 1.0 / (self.degree(v) as f64).sqrt())
            .collect();
        let mut l = DMatrix::zeros(k, k);
        for i in 0..k {
            l[(i, i)] = 1.0;
        }
        for &(u, v) in &self.edges {
            let (i, j) = (pos[u as usize], pos[v as usize]);
            let w = inv_sqrt[i] * inv_sqrt[j];
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        (l, verts)
    }
}

/// The full matrix family of a graph.
pub struct GraphMatrices {
    pub adjacency: DMatrix<f64>,
    pub degree: DMatrix<f64>,
    pub incidence: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    /// Normalized Laplacian on the degree-positive vertex set.
    pub normalized: DMatrix<f64>,
    /// Vertices the normalized Laplacian's rows correspond to.
    pub positive_vertices: Vec<u32>,
}

/// Builds (A, D, B, L, normalized L) in one pass. The incidence matrix is
/// dense over all n-choose-2 pairs, so this is for desk-scale n.
pub fn build_matrices(g: &Graph) -> GraphMatrices {
    let (normalized, positive_vertices) = g.normalized_laplacian();
    GraphMatrices {
        adjacency: g.adjacency_matrix(),
        degree: g.degree_matrix(),
        incidence: g.incidence_matrix(),
        laplacian: g.laplacian(),
        normalized,
        positive_vertices,
    }
}
