//! Expander decomposition with a degree floor, the hierarchical schedule
//! built on it, vertex sampling, and balanced-path-of-expanders checks.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{derive_seed, keyed_uniform};
use crate::spectral::{
    certify_expander, conductance_exact, spectral_gap, sweep_cut_multi, ExpanderCertificate,
    EXACT_CONDUCTANCE_MAX_N,
};
use serde::Serialize;

/// One certified expander part of a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct Part {
    pub vertices: Vec<u32>,
    pub certificate: ExpanderCertificate,
    pub min_degree: usize,
    pub edge_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionResult {
    pub parts: Vec<Part>,
    /// Edges belonging to no part: pruned low-degree edges plus removed
    /// sparse cuts.
    pub leftover: Vec<(u32, u32)>,
    pub eps: f64,
    pub d_min: f64,
    /// The guaranteed bound 8 eps m log2(n) + n d_min on `leftover`.
    pub edge_bound: f64,
}

impl DecompositionResult {
    /// Edges assigned to parts, in pair order.
    pub fn assigned_edges(&self, g: &Graph) -> Vec<(u32, u32)> {
        let mut leftover = self.leftover.clone();
        leftover.sort_unstable();
        g.edges()
            .iter()
            .copied()
            .filter(|e| leftover.binary_search(e).is_err())
            .collect()
    }
}

/// Removes vertices with degree below the floor, iterating to a fixed point
/// since each removal lowers neighbors' degrees. Returns surviving vertices
/// (sorted, global labels) and appends pruned edges to `removed`.
fn prune_low_degree(
    g: &Graph,
    verts: &[u32],
    d_min: f64,
    removed: &mut Vec<(u32, u32)>,
) -> Vec<u32> {
    let mut alive: Vec<bool> = vec![false; g.n()];
    for &v in verts {
        alive[v as usize] = true;
    }
    let mut degree = vec![0usize; g.n()];
    for &v in verts {
        degree[v as usize] = g
            .neighbors(v)
            .iter()
            .filter(|&&w| alive[w as usize])
            .count();
    }
    let mut queue: Vec<u32> = verts
        .iter()
        .copied()
        .filter(|&v| (degree[v as usize] as f64) < d_min)
        .collect();
    while let Some(v) = queue.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for &w in g.neighbors(v) {
            if alive[w as usize] {
                removed.push((v.min(w), v.max(w)));
                degree[w as usize] -= 1;
                if (degree[w as usize] as f64) < d_min {
                    queue.push(w);
                }
            }
        }
    }
    verts
        .iter()
        .copied()
        .filter(|&v| alive[v as usize])
        .collect()
}

fn components_of(g: &Graph, verts: &[u32]) -> Vec<Vec<u32>> {
    let mut in_set = vec![false; g.n()];
    for &v in verts {
        in_set[v as usize] = true;
    }
    let mut seen = vec![false; g.n()];
    let mut comps = Vec::new();
    for &start in verts {
        if seen[start as usize] {
            continue;
        }
        let mut comp = vec![start];
        seen[start as usize] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if in_set[w as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Partitions the graph into certified eps-expanders with minimum degree at
/// least `d_min`, leaving at most `8 eps m log2(n) + n d_min` edges outside
/// all parts. Certification is exact conductance for parts small enough to
/// enumerate and the sound Cheeger direction (lambda >= 2 eps) otherwise;
/// every removed cut is verified to have conductance below eps, which is
/// what the leftover bound's charging argument needs.
///
/// A connected part that neither certifies nor yields a below-eps cut (the
/// quadratic Cheeger gap) is reported as a numerical failure with
/// diagnostics rather than silently weakening the guarantee.
pub fn expander_decompose(g: &Graph, eps: f64, d_min: f64) -> Result<DecompositionResult> {
    if !(0.0 < eps && eps < 0.5) {
        return Err(Error::contract(format!(
            "eps must be in (0, 1/2), got {eps}"
        )));
    }
    if d_min <= 0.0 {
        return Err(Error::contract(format!(
            "d_min must be positive, got {d_min}"
        )));
    }
    let mut leftover: Vec<(u32, u32)> = Vec::new();
    let mut parts: Vec<Part> = Vec::new();
    let mut stack: Vec<Vec<u32>> = vec![(0..g.n() as u32).collect()];
    while let Some(verts) = stack.pop() {
        let surviving = prune_low_degree(g, &verts, d_min, &mut leftover);
        for comp in components_of(g, &surviving) {
            debug_assert!(comp.len() >= 2);
            let sub = g.compact_subgraph(&comp);
            let min_degree = (0..sub.n() as u32).map(|v| sub.degree(v)).min().unwrap();
            if sub.n() <= EXACT_CONDUCTANCE_MAX_N {
                let (phi, cut) = conductance_exact(&sub)?;
                if phi >= eps {
                    parts.push(Part {
                        vertices: comp,
                        certificate: ExpanderCertificate::Exact(phi),
                        min_degree,
                        edge_count: sub.edge_count(),
                    });
                } else {
                    split_along(&sub, &comp, &cut.side, &mut leftover, &mut stack);
                }
                continue;
            }
            let lambda = spectral_gap(&sub)?;
            if lambda >= 2.0 * eps {
                parts.push(Part {
                    vertices: comp,
                    certificate: ExpanderCertificate::Spectral(lambda),
                    min_degree,
                    edge_count: sub.edge_count(),
                });
                continue;
            }
            let cut = sweep_cut_multi(&sub, 3)?;
            if cut.conductance() < eps {
                split_along(&sub, &comp, &cut.side, &mut leftover, &mut stack);
            } else {
                return Err(Error::numerical(format!(
                    "certification gap on a {}-vertex part: lambda = {lambda:.6} < 2 eps = \
                     {:.6} but best sweep conductance {:.6} >= eps = {eps:.6}",
                    sub.n(),
                    2.0 * eps,
                    cut.conductance(),
                )));
            }
        }
    }
    leftover.sort_unstable();
    let n = g.n() as f64;
    let m = g.edge_count() as f64;
    let edge_bound = if g.n() >= 2 {
        8.0 * eps * m * n.log2() + n * d_min
    } else {
        n * d_min
    };
    if leftover.len() as f64 > edge_bound + 1e-9 {
        return Err(Error::numerical(format!(
            "leftover bound violated: {} edges > {edge_bound}",
            leftover.len()
        )));
    }
    let assigned: usize = parts.iter().map(|p| p.edge_count).sum();
    debug_assert_eq!(assigned + leftover.len(), g.edge_count());
    Ok(DecompositionResult {
        parts,
        leftover,
        eps,
        d_min,
        edge_bound,
    })
}

fn split_along(
    sub: &Graph,
    comp: &[u32],
    local_side: &[u32],
    leftover: &mut Vec<(u32, u32)>,
    stack: &mut Vec<Vec<u32>>,
) {
    let mut in_side = vec![false; sub.n()];
    for &v in local_side {
        in_side[v as usize] = true;
    }
    for &(u, v) in sub.edges() {
        if in_side[u as usize] != in_side[v as usize] {
            let (gu, gv) = (comp[u as usize], comp[v as usize]);
            leftover.push((gu.min(gv), gu.max(gv)));
        }
    }
    let side: Vec<u32> = local_side.iter().map(|&v| comp[v as usize]).collect();
    let rest: Vec<u32> = (0..sub.n() as u32)
        .filter(|&v| !in_side[v as usize])
        .map(|v| comp[v as usize])
        .collect();
    stack.push(side);
    stack.push(rest);
}

/// One level of the hierarchical decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct HierLevel {
    /// Edges assigned to this level's expanders.
    pub assigned_edges: Vec<(u32, u32)>,
    pub expanders: Vec<Part>,
    /// Degree floor used at this level: |F_{i-1}| / (36 n).
    pub degree_floor: f64,
    /// |assigned_edges|.
    pub m_i: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HierarchicalDecomposition {
    pub levels: Vec<HierLevel>,
    /// Leftover edges after the last decomposed level.
    pub terminal: Vec<(u32, u32)>,
    pub eps: f64,
    pub t: usize,
}

/// How many levels to build.
#[derive(Debug, Clone, Copy)]
pub enum LevelRule {
    Fixed(usize),
    /// Keep decomposing while the last level still carries at least
    /// n^(1+delta) d^(3/2) edges.
    Auto {
        d: u32,
        delta: f64,
    },
}

/// Repeatedly applies [`expander_decompose`] to the leftover edges with
/// eps = 1/(36 log2 n) and degree floor |F_{i-1}|/(36 n). Each level's
/// leftover provably shrinks by 4x, which the implementation asserts.
pub fn hierarchical_decompose(g: &Graph, rule: LevelRule) -> Result<HierarchicalDecomposition> {
    let n = g.n();
    if n < 2 {
        return Err(Error::contract("hierarchical decomposition needs n >= 2"));
    }
    let eps = 1.0 / (36.0 * (n as f64).log2());
    let max_levels = match rule {
        LevelRule::Fixed(t) => {
            if t < 1 {
                return Err(Error::contract("level count must be >= 1"));
            }
            t
        }
        LevelRule::Auto { .. } => usize::MAX,
    };
    let threshold = match rule {
        LevelRule::Auto { d, delta } => (n as f64).powf(1.0 + delta) * (d as f64).powf(1.5),
        LevelRule::Fixed(_) => f64::NAN,
    };
    let mut frontier: Vec<(u32, u32)> = g.edges().to_vec();
    let mut levels: Vec<HierLevel> = Vec::new();
    while levels.len() < max_levels && !frontier.is_empty() {
        let prev = frontier.len();
        let degree_floor = prev as f64 / (36.0 * n as f64);
        let level_graph = Graph::new(n, frontier.iter().copied())?;
        let decomp = expander_decompose(&level_graph, eps, degree_floor)?;
        let assigned = decomp.assigned_edges(&level_graph);
        let m_i = assigned.len();
        frontier = decomp.leftover.clone();
        if frontier.len() as f64 > prev as f64 / 4.0 + 1e-9 {
            return Err(Error::numerical(format!(
                "level {} leftover {} exceeds quarter of {}",
                levels.len() + 1,
                frontier.len(),
                prev
            )));
        }
        levels.push(HierLevel {
            assigned_edges: assigned,
            expanders: decomp.parts,
            degree_floor,
            m_i,
        });
        if let LevelRule::Auto { .. } = rule {
            if (m_i as f64) < threshold {
                break;
            }
        }
    }
    let t = levels.len();
    Ok(HierarchicalDecomposition {
        levels,
        terminal: frontier,
        eps,
        t,
    })
}

/// Result of independent vertex sampling: the induced graph on the same
/// vertex universe (labels preserved) plus the kept set.
#[derive(Debug, Clone)]
pub struct VertexSample {
    pub graph: Graph,
    pub kept: Vec<u32>,
}

/// Keeps each vertex independently with probability `p` and induces.
pub fn vertex_sample(g: &Graph, p: f64, seed: u64) -> VertexSample {
    let threshold = (p * 2f64.powi(64)) as u128;
    let key = derive_seed(seed, "vertex-sample", 0);
    let keep: Vec<bool> = (0..g.n() as u64)
        .map(|v| (keyed_uniform(key, 6, v) as u128) < threshold)
        .collect();
    let kept: Vec<u32> = (0..g.n() as u32).filter(|&v| keep[v as usize]).collect();
    VertexSample {
        graph: g.induced(&keep),
        kept,
    }
}

/// Keeps exactly the within-layer and adjacent-layer edges of `g`.
pub fn partition_intersect(g: &Graph, layers: &[u32]) -> Graph {
    assert_eq!(layers.len(), g.n(), "layers must cover all vertices");
    Graph::new(
        g.n(),
        g.edges()
            .iter()
            .copied()
            .filter(|&(u, v)| layers[u as usize].abs_diff(layers[v as usize]) <= 1),
    )
    .unwrap()
}

/// Per-window outcome of the balanced-path check.
#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub window: usize,
    pub size: usize,
    pub certificate: Option<ExpanderCertificate>,
    pub volume_in_chain: usize,
    pub volume_within: usize,
    pub failure: Option<String>,
}

/// Report for the three balanced-path conditions: (1) every window induces a
/// certified phi-expander, (2) window volumes are within 3x of each other,
/// (3) each layer holds at least 1/8 of its windows' internal volume.
#[derive(Debug, Clone, Serialize)]
pub struct BalancedPathReport {
    pub phi: f64,
    pub d: u32,
    pub windows: Vec<WindowReport>,
    pub condition_expanders: bool,
    pub condition_volumes: bool,
    pub condition_layer_mass: bool,
    /// max over (i, j) of vol(U_i) / vol_{H_j}(U_j); condition (2) needs <= 3.
    pub worst_volume_ratio: f64,
    /// min over windows i and layers j in {i, i+1} of the ordered
    /// within-layer pair count of V_j divided by vol_{H_i}(U_i);
    /// condition (3) needs >= 1/8.
    pub worst_layer_mass_ratio: f64,
}

impl BalancedPathReport {
    pub fn all_pass(&self) -> bool {
        self.condition_expanders && self.condition_volumes && self.condition_layer_mass
    }
}

/// Evaluates the balanced-path conditions for a chain graph under a layer
/// partition. Condition (1) uses expander certification per window; (2) and
/// (3) are exact volume and pair counts. The within-layer mass in (3) is the
/// ordered pair count, i.e. twice the edge count.
pub fn check_balanced_path(g: &Graph, layers: &[u32], d: u32, phi: f64) -> BalancedPathReport {
    assert_eq!(layers.len(), g.n());
    assert!(d >= 2, "balanced path needs d >= 2");
    let d_us = d as usize;
    let mut layer_sets: Vec<Vec<u32>> = vec![Vec::new(); d_us];
    for (v, &l) in layers.iter().enumerate() {
        layer_sets[l as usize].push(v as u32);
    }
    // Within-layer edge counts and window subgraph volumes.
    let mut within_edges = vec![0usize; d_us];
    let mut window_vol = vec![0usize; d_us.saturating_sub(1)];
    for &(u, v) in g.edges() {
        let (lu, lv) = (layers[u as usize] as usize, layers[v as usize] as usize);
        if lu == lv {
            within_edges[lu] += 1;
        }
        let (lo, hi) = (lu.min(lv), lu.max(lv));
        if hi - lo <= 1 {
            // The edge lies inside window U_i iff both endpoints are in
            // layers {i, i+1}.
            for w in hi.saturating_sub(1)..=lo.min(d_us - 2) {
                window_vol[w] += 2;
            }
        }
    }
    let mut windows = Vec::new();
    let mut cond1 = true;
    for i in 0..d_us - 1 {
        let mut members: Vec<u32> = layer_sets[i]
            .iter()
            .chain(layer_sets[i + 1].iter())
            .copied()
            .collect();
        members.sort_unstable();
        let vol_chain = g.volume_of(&members);
        let mut failure = None;
        let mut certificate = None;
        if layer_sets[i].is_empty() || layer_sets[i + 1].is_empty() {
            failure = Some(format!("window {i}: empty layer"));
        } else {
            let sub = g.compact_subgraph(&members);
            match certify_expander(&sub, phi) {
                Ok(Some(cert)) => certificate = Some(cert),
                Ok(None) => failure = Some(format!("window {i}: not certified at phi={phi}")),
                Err(e) => failure = Some(format!("window {i}: {e}")),
            }
        }
        if failure.is_some() {
            cond1 = false;
        }
        windows.push(WindowReport {
            window: i,
            size: members.len(),
            certificate,
            volume_in_chain: vol_chain,
            volume_within: window_vol[i],
            failure,
        });
    }
    let mut worst_volume_ratio = 0.0f64;
    for wi in &windows {
        for wj in &windows {
            let ratio = if wj.volume_within == 0 {
                f64::INFINITY
            } else {
                wi.volume_in_chain as f64 / wj.volume_within as f64
            };
            worst_volume_ratio = worst_volume_ratio.max(ratio);
        }
    }
    let cond2 = worst_volume_ratio <= 3.0;
    let mut worst_layer_mass_ratio = f64::INFINITY;
    for (i, w) in windows.iter().enumerate() {
        for j in [i, i + 1] {
            if w.volume_within == 0 {
                continue;
            }
            let ordered_within = 2 * within_edges[j];
            worst_layer_mass_ratio =
                worst_layer_mass_ratio.min(ordered_within as f64 / w.volume_within as f64);
        }
    }
    let cond3 = worst_layer_mass_ratio >= 1.0 / 8.0;
    BalancedPathReport {
        phi,
        d,
        windows,
        condition_expanders: cond1,
        condition_volumes: cond2,
        condition_layer_mass: cond3,
        worst_volume_ratio,
        worst_layer_mass_ratio,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionLbReport {
    pub tested: usize,
    /// min over tested S of crossing(S) / (phi * min(vol(S), vol(U_1))).
    pub min_ratio: f64,
    pub flagged_below: usize,
    pub flag_threshold: f64,
}

/// Audits the cut expansion lower bound of a balanced path: over cuts S with
/// vol(S) <= vol(V)/2, the crossing count should be at least a constant times
/// phi * min(vol(S), vol(U_1)). Exhaustive below the enumeration limit,
/// otherwise over `trials` random subsets.
pub fn check_expansion_lb(
    g: &Graph,
    layers: &[u32],
    phi: f64,
    trials: usize,
    seed: u64,
    flag_threshold: f64,
) -> Result<ExpansionLbReport> {
    assert_eq!(layers.len(), g.n());
    let n = g.n();
    if n < 2 || g.edge_count() == 0 {
        return Err(Error::contract("expansion audit needs a nonempty graph"));
    }
    let mut first_window: Vec<u32> = (0..n as u32).filter(|&v| layers[v as usize] <= 1).collect();
    first_window.sort_unstable();
    let vol_u1 = g.volume_of(&first_window);
    if vol_u1 == 0 {
        return Err(Error::contract("first window has zero volume"));
    }
    let total_vol = g.volume();
    let mut report = ExpansionLbReport {
        tested: 0,
        min_ratio: f64::INFINITY,
        flagged_below: 0,
        flag_threshold,
    };
    let mut consider = |crossing: usize, vol: usize| {
        if vol == 0 || 2 * vol > total_vol {
            return;
        }
        let denom = phi * vol.min(vol_u1) as f64;
        let ratio = crossing as f64 / denom;
        report.tested += 1;
        report.min_ratio = report.min_ratio.min(ratio);
        if ratio < flag_threshold {
            report.flagged_below += 1;
        }
    };
    if n <= EXACT_CONDUCTANCE_MAX_N {
        // Gray-code enumeration over subsets containing vertex 0; each cut
        // is scored from both sides since min(vol, vol(U_1)) is one-sided.
        let mut in_side = vec![false; n];
        in_side[0] = true;
        let mut vol = g.degree(0);
        let mut crossing = g.degree(0);
        consider(crossing, vol);
        consider(crossing, total_vol - vol);
        for code in 1u64..(1u64 << (n - 1)) {
            let v = (code.trailing_zeros() + 1) as u32;
            let deg = g.degree(v);
            let in_count = g
                .neighbors(v)
                .iter()
                .filter(|&&w| in_side[w as usize])
                .count();
            if !in_side[v as usize] {
                in_side[v as usize] = true;
                vol += deg;
                crossing = crossing + deg - 2 * in_count;
            } else {
                in_side[v as usize] = false;
                vol -= deg;
                crossing = crossing + 2 * in_count - deg;
            }
            consider(crossing, vol);
            consider(crossing, total_vol - vol);
        }
    } else {
        let key = derive_seed(seed, "expansion-lb", 0);
        for t in 0..trials {
            let mut side: Vec<u32> = Vec::new();
            let mut in_side = vec![false; n];
            for v in 0..n as u32 {
                if keyed_uniform(key, t as u64, v as u64) & 1 == 1 {
                    side.push(v);
                    in_side[v as usize] = true;
                }
            }
            if side.is_empty() || side.len() == n {
                continue;
            }
            let vol = g.volume_of(&side);
            let crossing = g
                .edges()
                .iter()
                .filter(|&&(u, v)| in_side[u as usize] != in_side[v as usize])
                .count();
            consider(crossing, vol);
            consider(crossing, total_vol - vol);
        }
    }
    Ok(report)
}
