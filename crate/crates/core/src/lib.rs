//! Graph sketching laboratory.
//!
//! A workbench for linear graph sketches built from random Gaussian
//! projections of the signed edge-incidence matrix, together with the
//! spectral machinery needed to study them at desk scale: conductance and
//! spectral gaps, effective resistances, expander decompositions, a
//! clique-chain instance distribution, sparse-recovery decoders
//! (l0-samplers, heavy hitters, sketched spanning forests), and exact
//! KL-divergence formulas for sketches of neighboring graphs.
//!
//! Everything is deterministic under a single 64-bit seed: Gaussian values
//! are produced by a counter-based generator keyed on (seed, row, pair
//! index), so sketches can be updated, replayed, and compared bitwise.

pub mod analysis;
pub mod decomposition;
pub mod error;
pub mod graph;
pub mod instances;
pub mod linalg;
pub mod recovery;
pub mod rng;
pub mod sketch;
pub mod spectral;
pub mod unionfind;

pub use error::{Error, Result};
pub use graph::Graph;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::graph::{pair_index, Graph};
    use crate::rng::{bounded, keyed_uniform, mix64};

    /// Seeded Erdos-Renyi-style graph with 2..=max_n vertices, p = 1/2.
    pub fn random_graph(seed: u64, max_n: usize) -> Graph {
        let k = mix64(seed ^ 0xabcd);
        let n = 2 + bounded(keyed_uniform(k, 1, 0), (max_n - 1) as u64) as usize;
        random_graph_np(seed, n, 0.5)
    }

    pub fn random_graph_np(seed: u64, n: usize, p: f64) -> Graph {
        let k = mix64(seed ^ 0xabcd);
        let threshold = (p * 2f64.powi(64)) as u128;
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if (keyed_uniform(k, 2, pair_index(u, v, n)) as u128) < threshold {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, edges).unwrap()
    }

    /// Random connected graph: a random tree plus extra random edges.
    pub fn random_connected_graph(seed: u64, n: usize, extra_p: f64) -> Graph {
        let k = mix64(seed ^ 0x5eed);
        let mut edges: Vec<(u32, u32)> = (1..n as u32)
            .map(|v| (bounded(keyed_uniform(k, 3, v as u64), v as u64) as u32, v))
            .collect();
        let threshold = (extra_p * 2f64.powi(64)) as u128;
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if (keyed_uniform(k, 4, pair_index(u, v, n)) as u128) < threshold
                    && !edges.contains(&(u, v))
                {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, edges).unwrap()
    }

    pub fn random_tree(seed: u64, n: usize) -> Graph {
        let k = mix64(seed ^ 0x7ee);
        Graph::new(
            n,
            (1..n as u32).map(|v| (bounded(keyed_uniform(k, 5, v as u64), v as u64) as u32, v)),
        )
        .unwrap()
    }
}
