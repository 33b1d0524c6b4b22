//! The clique-chain instance distribution and its derived forms, plus
//! spanner and distance verifiers.
//!
//! An instance partitions `n` vertices into `d` layers i.i.d. uniformly,
//! places a clique on every union of adjacent layers, and draws one extra
//! pair `e*` uniformly over all pairs, independent of the chain. The layer
//! stream and the pair stream are derived separately from the instance seed,
//! so the independence is structural.

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_unindex, Graph};
use crate::rng::{bounded, derive_seed, keyed_uniform};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A chain-of-cliques instance: the graph `G` (without `e*`), the special
/// pair, and the layer assignment.
#[derive(Debug, Clone)]
pub struct ChainInstance {
    pub graph: Graph,
    pub e_star: (u32, u32),
    /// Layer index per vertex, in `0..d`.
    pub layers: Vec<u32>,
    pub d: u32,
}

/// Builds the chain graph for a given layer assignment: a clique on every
/// `V_i` united with `V_{i+1}`.
pub fn chain_graph(n: usize, layers: &[u32]) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            let (lu, lv) = (layers[u as usize], layers[v as usize]);
            if lu.abs_diff(lv) <= 1 {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

impl ChainInstance {
    /// Draws an instance. Layers are i.i.d. uniform over `[d]` (empty layers
    /// are allowed; occupancy is reported so experiments can filter), and
    /// `e*` is uniform over all pairs from an independent stream.
    pub fn sample(n: usize, d: u32, seed: u64) -> Result<ChainInstance> {
        if d < 2 {
            return Err(Error::contract(format!(
                "chain instance requires d >= 2, got {d}"
            )));
        }
        if n < d as usize {
            return Err(Error::contract(format!(
                "chain instance requires n >= d, got n={n}, d={d}"
            )));
        }
        let layer_key = derive_seed(seed, "layers", 0);
        let layers: Vec<u32> = (0..n as u64)
            .map(|v| bounded(keyed_uniform(layer_key, 1, v), d as u64) as u32)
            .collect();
        let estar_key = derive_seed(seed, "estar", 0);
        let pair = bounded(keyed_uniform(estar_key, 2, 0), pair_count(n));
        let e_star = pair_unindex(pair, n);
        Ok(ChainInstance {
            graph: chain_graph(n, &layers),
            e_star,
            layers,
            d,
        })
    }

    /// Vertices per layer.
    pub fn occupancy(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.d as usize];
        for &l in &self.layers {
            counts[l as usize] += 1;
        }
        counts
    }

    /// `G + e*` with set semantics (a duplicate `e*` leaves `G` unchanged).
    pub fn graph_with_estar(&self) -> Graph {
        self.graph.with_edge(self.e_star.0, self.e_star.1).unwrap()
    }

    /// Whether the chain keeps the special pair far apart: BFS-decided
    /// `dist_G(u*, v*) > d/2`, exact in integers.
    pub fn distance_property(&self) -> bool {
        match self.graph.bfs_distance(self.e_star.0, self.e_star.1) {
            None => true,
            Some(dist) => 2 * dist > self.d as usize,
        }
    }
}

/// A chain instance with a hidden coin: the realized graph is `G` when
/// theta = 0 and `G + e*` when theta = 1.
#[derive(Debug, Clone)]
pub struct ThetaInstance {
    pub base: ChainInstance,
    pub theta: bool,
    pub realized: Graph,
}

impl ThetaInstance {
    pub fn sample(n: usize, d: u32, seed: u64) -> Result<ThetaInstance> {
        let base = ChainInstance::sample(n, d, seed)?;
        let theta = keyed_uniform(derive_seed(seed, "theta", 0), 3, 0) & 1 == 1;
        let realized = if theta {
            base.graph_with_estar()
        } else {
            base.graph.clone()
        };
        Ok(ThetaInstance {
            base,
            theta,
            realized,
        })
    }
}

/// A theta instance extended with two degree-1 endpoint vertices `a - u*`
/// and `v* - b`, on `n + 2` vertices. When theta = 1 the endpoint distance
/// is exactly 3.
#[derive(Debug, Clone)]
pub struct EndpointInstance {
    pub theta: ThetaInstance,
    pub a: u32,
    pub b: u32,
    pub graph: Graph,
}

impl EndpointInstance {
    pub fn sample(n: usize, d: u32, seed: u64) -> Result<EndpointInstance> {
        let theta = ThetaInstance::sample(n, d, seed)?;
        let a = n as u32;
        let b = n as u32 + 1;
        let (u_star, v_star) = theta.base.e_star;
        let mut edges: Vec<(u32, u32)> = theta.realized.edges().to_vec();
        edges.push((u_star, a));
        edges.push((v_star, b));
        let graph = Graph::new(n + 2, edges)?;
        Ok(EndpointInstance { theta, a, b, graph })
    }
}

/// Per-edge spanner check: `H` must be an edge-subgraph of `G`, and every
/// edge of `G` must have hop distance at most `stretch` in `H`. This implies
/// the all-pairs definition by path composition.
pub fn verify_spanner(g: &Graph, h: &Graph, stretch: f64) -> Result<bool> {
    if h.n() != g.n() {
        return Err(Error::contract("spanner must share the vertex set"));
    }
    for &(u, v) in h.edges() {
        if !g.has_edge(u, v) {
            return Err(Error::contract(format!(
                "spanner edge ({u},{v}) is not an edge of the host graph"
            )));
        }
    }
    // One BFS per distinct source endpoint.
    let mut sources: Vec<u32> = g.edges().iter().map(|&(u, _)| u).collect();
    sources.sort_unstable();
    sources.dedup();
    for u in sources {
        let dist = h.bfs_from(u);
        for &v in g.neighbors(u) {
            if v < u {
                continue;
            }
            match dist[v as usize] {
                Some(d) if (d as f64) <= stretch => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// Serialized instance: graph JSON plus chain metadata, loadable as a plain
/// graph by the graph loader.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub e_star: (u32, u32),
    pub layers: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<(u32, u32)>,
}

impl InstanceJson {
    pub fn from_chain(inst: &ChainInstance) -> InstanceJson {
        let realized = inst.graph_with_estar();
        InstanceJson {
            n: realized.n(),
            edges: realized.edges().to_vec(),
            e_star: inst.e_star,
            layers: inst.layers.clone(),
            theta: None,
            endpoints: None,
        }
    }

    pub fn from_theta(inst: &ThetaInstance) -> InstanceJson {
        InstanceJson {
            n: inst.realized.n(),
            edges: inst.realized.edges().to_vec(),
            e_star: inst.base.e_star,
            layers: inst.base.layers.clone(),
            theta: Some(inst.theta as u8),
            endpoints: None,
        }
    }

    pub fn from_endpoint(inst: &EndpointInstance) -> InstanceJson {
        InstanceJson {
            n: inst.graph.n(),
            edges: inst.graph.edges().to_vec(),
            e_star: inst.theta.base.e_star,
            layers: inst.theta.base.layers.clone(),
            theta: Some(inst.theta.theta as u8),
            endpoints: Some((inst.a, inst.b)),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn render(&self) -> String {
        format!("{}\n", serde_json::to_string(self).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_chain_structure(inst: &ChainInstance) {
        // Every within-layer and adjacent-layer pair is an edge; every pair
        // with layer gap >= 2 is a non-edge.
        let n = inst.graph.n();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                let gap = inst.layers[u as usize].abs_diff(inst.layers[v as usize]);
                assert_eq!(inst.graph.has_edge(u, v), gap <= 1, "pair ({u},{v})");
            }
        }
    }

    #[test]
    fn sampled_instances_have_chain_structure() {
        for seed in 0..20u64 {
            let inst = ChainInstance::sample(24, 8, seed).unwrap();
            assert_eq!(inst.graph.n(), 24);
            assert_chain_structure(&inst);
            assert_eq!(inst.occupancy().iter().sum::<usize>(), 24);
        }
    }

    #[test]
    fn d2_gives_the_complete_graph() {
        let inst = ChainInstance::sample(10, 2, 5).unwrap();
        assert_eq!(inst.graph, Graph::complete(10));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = ChainInstance::sample(24, 8, 7).unwrap();
        let b = ChainInstance::sample(24, 8, 7).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.e_star, b.e_star);
        assert_eq!(a.layers, b.layers);
    }

    #[test]
    fn parameter_contracts() {
        assert!(ChainInstance::sample(10, 1, 0).is_err());
        assert!(ChainInstance::sample(3, 5, 0).is_err());
    }

    #[test]
    fn distance_property_cases() {
        let layers = vec![0, 0, 1, 1, 2, 2, 3, 3];
        // Same layer: distance 1, so 2*1 > 4 fails.
        let inst = ChainInstance {
            graph: chain_graph(8, &layers),
            e_star: (0, 1),
            layers: layers.clone(),
            d: 4,
        };
        assert!(!inst.distance_property());
        // Opposite ends: dist = 3 and 2*3 > 4.
        let inst = ChainInstance {
            graph: chain_graph(8, &layers),
            e_star: (0, 7),
            layers,
            d: 4,
        };
        assert_eq!(inst.graph.bfs_distance(0, 7), Some(3));
        assert!(inst.distance_property());
    }

    #[test]
    fn distance_property_is_bfs_decided_not_formula_decided() {
        // An empty middle layer disconnects the chain; BFS must still decide.
        let layers = vec![0, 0, 2, 2];
        let inst = ChainInstance {
            graph: chain_graph(4, &layers),
            e_star: (0, 2),
            layers,
            d: 3,
        };
        assert_eq!(inst.graph.bfs_distance(0, 2), None);
        assert!(inst.distance_property());
    }

    #[test]
    fn theta_realization() {
        let mut seen = [false; 2];
        for seed in 0..40u64 {
            let inst = ThetaInstance::sample(12, 3, seed).unwrap();
            seen[inst.theta as usize] = true;
            if inst.theta {
                assert!(inst
                    .realized
                    .has_edge(inst.base.e_star.0, inst.base.e_star.1));
                assert_eq!(inst.realized, inst.base.graph_with_estar());
            } else {
                assert_eq!(inst.realized, inst.base.graph);
            }
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn endpoint_distance_is_three_when_theta_set() {
        let mut found = false;
        for seed in 0..40u64 {
            let inst = EndpointInstance::sample(12, 3, seed).unwrap();
            assert_eq!(inst.graph.n(), 14);
            assert_eq!(inst.graph.degree(inst.a), 1);
            assert_eq!(inst.graph.degree(inst.b), 1);
            if inst.theta.theta {
                assert_eq!(inst.graph.bfs_distance(inst.a, inst.b), Some(3));
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn layer_and_estar_streams_are_separate() {
        assert_ne!(derive_seed(3, "layers", 0), derive_seed(3, "estar", 0));
        let a = ChainInstance::sample(16, 4, 123).unwrap();
        let b = ChainInstance::sample(16, 4, 123).unwrap();
        assert_eq!(a.layers, b.layers);
        assert_eq!(a.e_star, b.e_star);
    }

    #[test]
    fn estar_marginal_is_uniform_chi_squared() {
        // Goodness of fit over all pairs at significance 1e-3.
        let n = 20usize;
        let samples = 100_000usize;
        let bins = pair_count(n) as usize;
        let mut counts = vec![0u64; bins];
        for t in 0..samples {
            let inst = ChainInstance::sample(n, 4, derive_seed(99, "chi", t as u64)).unwrap();
            let idx = crate::graph::pair_index(inst.e_star.0, inst.e_star.1, n);
            counts[idx as usize] += 1;
        }
        let expected = samples as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // Wilson-Hilferty upper quantile for df = bins - 1 at 1 - 1e-3.
        let df = (bins - 1) as f64;
        let z = 3.0902;
        let threshold = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(chi2 < threshold, "chi2 {chi2} >= {threshold}");
    }

    #[test]
    fn spanner_verifier_cases() {
        let g = Graph::complete(3);
        assert!(verify_spanner(&g, &g, 1.0).unwrap());
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(verify_spanner(&g, &path, 2.0).unwrap());
        assert!(!verify_spanner(&g, &path, 1.0).unwrap());
        let not_sub = Graph::new(3, [(0, 2)]).unwrap();
        assert!(verify_spanner(&path, &not_sub, 1.0).is_err());
    }

    #[test]
    fn omitting_a_needed_estar_fails_the_spanner_check() {
        // When the chain keeps e* far apart, any subgraph of G + e* that
        // drops e* cannot have stretch d/2.
        let mut checked = false;
        for seed in 0..200u64 {
            let inst = ChainInstance::sample(24, 8, seed).unwrap();
            if !inst.distance_property() {
                continue;
            }
            let with = inst.graph_with_estar();
            if with.edge_count() == inst.graph.edge_count() {
                continue; // e* coincided with a chain edge
            }
            let stretch = inst.d as f64 / 2.0;
            assert!(!verify_spanner(&with, &inst.graph, stretch).unwrap());
            checked = true;
            break;
        }
        assert!(checked, "no qualifying instance found");
    }
}
