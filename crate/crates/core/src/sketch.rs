//! Random Gaussian projections of the signed edge-incidence matrix.
//!
//! A sketch row is a diagonal 0/1 sampling matrix over pair indices plus a
//! hidden Gaussian stream; the row's projection is `g * S * B(G)`. The
//! sketcher holds the Gaussian master seed; decoders only ever see sampling
//! descriptors and projection values.
//!
//! Projection coordinates are accumulated in 2^-80 fixed point (i128), so
//! sums over edges are exact and associative: linearity across edge-disjoint
//! graphs, insert-then-delete round trips, and interior-edge cancellation in
//! column combines all hold bitwise rather than within rounding slop.
//! Summation order is fixed as ascending pair index.

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, Graph};
use crate::rng::{bounded, dequantize, keyed_uniform, quantize, GaussianStream};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Membership rule of a sampling matrix: an explicit pair-index set or a
/// seeded implicit rule. Rules are public; decoders may query membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Selector {
    Explicit {
        pairs: Vec<u64>,
    },
    Bernoulli {
        p: f64,
        sample_seed: u64,
        label: u64,
    },
    /// Keeps each pair independently with probability 2^-j.
    Level {
        j: u32,
        sample_seed: u64,
        label: u64,
    },
    /// A level restricted to indices whose bit `bit` equals `side`; shares
    /// the level's subset when seed and label match.
    LevelBit {
        j: u32,
        bit: u32,
        side: bool,
        sample_seed: u64,
        label: u64,
    },
    /// Hash-bucket membership: index hashes to `bucket` out of `buckets`.
    Bucket {
        bucket: u32,
        buckets: u32,
        sample_seed: u64,
        label: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingMatrix {
    pub n: usize,
    pub selector: Selector,
}

#[inline]
fn level_member(j: u32, sample_seed: u64, label: u64, pair: u64) -> bool {
    if j == 0 {
        return true;
    }
    let h = keyed_uniform(sample_seed, label, pair);
    (h >> (64 - j.min(63))) == 0
}

impl Selector {
    /// Deterministic membership query for an index of the underlying
    /// universe (pair indices for graph sketches, coordinates for vectors).
    #[inline]
    pub fn contains(&self, index: u64) -> bool {
        match self {
            Selector::Explicit { pairs } => pairs.binary_search(&index).is_ok(),
            Selector::Bernoulli {
                p,
                sample_seed,
                label,
            } => {
                let threshold = (*p * 2f64.powi(64)) as u128;
                (keyed_uniform(*sample_seed, *label, index) as u128) < threshold
            }
            Selector::Level {
                j,
                sample_seed,
                label,
            } => level_member(*j, *sample_seed, *label, index),
            Selector::LevelBit {
                j,
                bit,
                side,
                sample_seed,
                label,
            } => {
                ((index >> bit) & 1 == *side as u64)
                    && level_member(*j, *sample_seed, *label, index)
            }
            Selector::Bucket {
                bucket,
                buckets,
                sample_seed,
                label,
            } => {
                bounded(keyed_uniform(*sample_seed, *label, index), *buckets as u64)
                    == *bucket as u64
            }
        }
    }
}

impl SamplingMatrix {
    pub fn explicit(n: usize, mut pairs: Vec<u64>) -> Result<SamplingMatrix> {
        pairs.sort_unstable();
        pairs.dedup();
        if let Some(&p) = pairs.iter().find(|&&p| p >= pair_count(n)) {
            return Err(Error::contract(format!(
                "pair index {p} out of range for n={n}"
            )));
        }
        Ok(SamplingMatrix {
            n,
            selector: Selector::Explicit { pairs },
        })
    }

    pub fn full(n: usize) -> SamplingMatrix {
        SamplingMatrix {
            n,
            selector: Selector::Bernoulli {
                p: 1.0,
                sample_seed: 0,
                label: 0,
            },
        }
    }

    pub fn bernoulli(n: usize, p: f64, sample_seed: u64, label: u64) -> SamplingMatrix {
        SamplingMatrix {
            n,
            selector: Selector::Bernoulli {
                p,
                sample_seed,
                label,
            },
        }
    }

    pub fn level(n: usize, j: u32, sample_seed: u64, label: u64) -> SamplingMatrix {
        SamplingMatrix {
            n,
            selector: Selector::Level {
                j,
                sample_seed,
                label,
            },
        }
    }

    /// Deterministic membership query for a pair index.
    #[inline]
    pub fn contains(&self, pair: u64) -> bool {
        self.selector.contains(pair)
    }
}

/// A projection vector in exact fixed point. Compare and add these when
/// bitwise linearity matters; use [`values`](Projection::values) for math.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection(pub Vec<i128>);

impl Projection {
    pub fn zeros(n: usize) -> Projection {
        Projection(vec![0; n])
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|&v| dequantize(v)).collect()
    }

    /// Exact coordinate sum; zero for every projection of a graph because
    /// each edge contributes +g and -g.
    pub fn coordinate_sum(&self) -> i128 {
        self.0.iter().sum()
    }
}

impl std::ops::Add for &Projection {
    type Output = Projection;
    fn add(self, rhs: &Projection) -> Projection {
        assert_eq!(self.0.len(), rhs.0.len());
        Projection(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// p = g * S * B(G): for every sampled edge (u,v) of G, add g_(u,v) at the
/// smaller endpoint and subtract it at the larger, ascending pair index.
pub fn project(g: &Graph, s: &SamplingMatrix, stream: &GaussianStream) -> Projection {
    assert_eq!(g.n(), s.n, "graph and sampling matrix disagree on n");
    let mut p = Projection::zeros(g.n());
    for &(u, v) in g.edges() {
        let pair = pair_index(u, v, g.n());
        if s.contains(pair) {
            let q = quantize(stream.value(pair));
            p.0[u as usize] += q;
            p.0[v as usize] -= q;
        }
    }
    p
}

#[derive(Debug, Clone)]
struct SketchRow {
    matrix: SamplingMatrix,
    projection: Projection,
}

/// An s-row Gaussian sketch of a graph. Holds the sketcher's secret seed so
/// it can apply dynamic updates; the decoder-facing view never contains it.
#[derive(Debug, Clone)]
pub struct Sketch {
    n: usize,
    master_seed: u64,
    rows: Vec<SketchRow>,
    edges: BTreeSet<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSign {
    Insert,
    Delete,
}

impl Sketch {
    /// Sketches `g` with one Gaussian row per sampling matrix; row `i` uses
    /// the stream labeled `i`, so rows are mutually independent.
    pub fn of_graph(g: &Graph, matrices: Vec<SamplingMatrix>, master_seed: u64) -> Sketch {
        use rayon::prelude::*;
        let rows: Vec<SketchRow> = matrices
            .into_par_iter()
            .enumerate()
            .map(|(i, matrix)| {
                let stream = GaussianStream::new(master_seed, i as u64);
                let projection = project(g, &matrix, &stream);
                SketchRow { matrix, projection }
            })
            .collect();
        Sketch {
            n: g.n(),
            master_seed,
            rows,
            edges: g.edges().iter().copied().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn sampling_matrices(&self) -> impl Iterator<Item = &SamplingMatrix> {
        self.rows.iter().map(|r| &r.matrix)
    }

    pub fn projection(&self, row: usize) -> &Projection {
        &self.rows[row].projection
    }

    /// Current sketched edge set (sketcher-side state for updates).
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    /// Applies a single edge insertion or deletion. The sketched multiset
    /// must remain a simple graph, so inserting a present edge or deleting
    /// an absent one is a contract violation.
    pub fn update(&mut self, edge: (u32, u32), sign: UpdateSign) -> Result<()> {
        let (a, b) = edge;
        if a == b || a as usize >= self.n || b as usize >= self.n {
            return Err(Error::contract(format!("invalid edge ({a},{b})")));
        }
        let key = (a.min(b), a.max(b));
        match sign {
            UpdateSign::Insert => {
                if !self.edges.insert(key) {
                    return Err(Error::contract(format!(
                        "insert of already-present edge ({},{})",
                        key.0, key.1
                    )));
                }
            }
            UpdateSign::Delete => {
                if !self.edges.remove(&key) {
                    return Err(Error::contract(format!(
                        "delete of never-inserted edge ({},{})",
                        key.0, key.1
                    )));
                }
            }
        }
        let pair = pair_index(key.0, key.1, self.n);
        let dir: i128 = match sign {
            UpdateSign::Insert => 1,
            UpdateSign::Delete => -1,
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if row.matrix.contains(pair) {
                let stream = GaussianStream::new(self.master_seed, i as u64);
                let q = quantize(stream.value(pair));
                row.projection.0[key.0 as usize] += dir * q;
                row.projection.0[key.1 as usize] -= dir * q;
            }
        }
        Ok(())
    }

    /// Sums each row's projection over a vertex set. Edges inside the set
    /// cancel exactly, so the result depends only on sampled cut edges.
    pub fn column_combine(&self, vertex_set: &[u32]) -> Vec<f64> {
        self.column_combine_fixed(vertex_set)
            .into_iter()
            .map(dequantize)
            .collect()
    }

    pub fn column_combine_fixed(&self, vertex_set: &[u32]) -> Vec<i128> {
        self.rows
            .iter()
            .map(|row| {
                vertex_set
                    .iter()
                    .map(|&v| row.projection.0[v as usize])
                    .sum()
            })
            .collect()
    }

    /// Decoder-facing view: sampling descriptors and projections only.
    pub fn decoder_view(&self) -> DecoderView {
        DecoderView {
            n: self.n,
            s: self.rows.len(),
            rows: self
                .rows
                .iter()
                .map(|r| DecoderRow {
                    sampling: r.matrix.clone(),
                    projection: r.projection.values(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderRow {
    pub sampling: SamplingMatrix,
    pub projection: Vec<f64>,
}

/// What a recovery algorithm is allowed to see.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderView {
    pub n: usize,
    pub s: usize,
    pub rows: Vec<DecoderRow>,
}

/// Sample covariance of `project` over fresh Gaussian streams. The exact
/// covariance is the Laplacian of the sampled subgraph of `g`.
pub fn empirical_covariance(
    g: &Graph,
    s: &SamplingMatrix,
    trials: usize,
    seed: u64,
) -> nalgebra::DMatrix<f64> {
    use rayon::prelude::*;
    assert!(trials >= 1);
    let n = g.n();
    let chunk = 1024usize;
    let starts: Vec<usize> = (0..trials).step_by(chunk).collect();
    let partials: Vec<nalgebra::DMatrix<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut acc = nalgebra::DMatrix::<f64>::zeros(n, n);
            for t in start..(start + chunk).min(trials) {
                let stream =
                    GaussianStream::new(crate::rng::derive_seed(seed, "cov-trial", t as u64), 0);
                let p = project(g, s, &stream).values();
                for i in 0..n {
                    if p[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        acc[(i, j)] += p[i] * p[j];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = nalgebra::DMatrix::<f64>::zeros(n, n);
    for m in partials {
        total += m;
    }
    total / trials as f64
}

/// Signed sparse vector with entries in {-1, 0, +1}, the shape every graph
/// recovery primitive consumes.
pub type SignedSupport = [(u64, i8)];

/// Sketches a signed vector with one row: sum of g(k) * x_k over sampled
/// support, in exact fixed point.
pub fn sketch_signed_vec(x: &SignedSupport, s: &SamplingMatrix, stream: &GaussianStream) -> i128 {
    let mut acc: i128 = 0;
    for &(k, sign) in x {
        if sign != 0 && s.contains(k) {
            acc += sign as i128 * quantize(stream.value(k));
        }
    }
    acc
}
