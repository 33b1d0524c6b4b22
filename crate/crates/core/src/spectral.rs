//! Conductance, spectral gaps, Cheeger machinery, effective resistance, and
//! random-walk trace diagnostics.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{matrix_power, sym_eigen};
use nalgebra::DMatrix;
use serde::Serialize;

/// Exhaustive conductance is limited to 2^(n-1) cut enumeration.
pub const EXACT_CONDUCTANCE_MAX_N: usize = 22;

/// A vertex cut, normalized so the reported side has the smaller volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub side: Vec<u32>,
    pub crossing: usize,
    pub vol_side: usize,
    pub vol_rest: usize,
}

impl Cut {
    fn normalized(g: &Graph, mut side: Vec<u32>, crossing: usize) -> Cut {
        side.sort_unstable();
        let vol_side = g.volume_of(&side);
        let vol_rest = g.volume() - vol_side;
        if vol_side > vol_rest || (vol_side == vol_rest && !is_lex_smaller_side(g, &side)) {
            let mut other: Vec<u32> = (0..g.n() as u32)
                .filter(|v| side.binary_search(v).is_err())
                .collect();
            other.sort_unstable();
            return Cut {
                side: other,
                crossing,
                vol_side: vol_rest,
                vol_rest: vol_side,
            };
        }
        Cut {
            side,
            crossing,
            vol_side,
            vol_rest,
        }
    }

    pub fn conductance(&self) -> f64 {
        self.crossing as f64 / self.vol_side.min(self.vol_rest) as f64
    }
}

fn is_lex_smaller_side(g: &Graph, side: &[u32]) -> bool {
    let other: Vec<u32> = (0..g.n() as u32)
        .filter(|v| side.binary_search(v).is_err())
        .collect();
    side <= other.as_slice()
}

/// Exact-fraction comparison of crossing/vol ratios, no float ties.
fn ratio_less(a: (usize, usize), b: (usize, usize)) -> std::cmp::Ordering {
    let lhs = a.0 as u128 * b.1 as u128;
    let rhs = b.0 as u128 * a.1 as u128;
    lhs.cmp(&rhs)
}

/// Spectral gap: second smallest eigenvalue of the normalized Laplacian on
/// the degree-positive vertex set. Always lands in [0, 2].
pub fn spectral_gap(g: &Graph) -> Result<f64> {
    let (l, verts) = g.normalized_laplacian();
    if verts.len() < 2 {
        return Err(Error::contract(
            "spectral gap needs at least 2 degree-positive vertices",
        ));
    }
    let eig = sym_eigen(&l);
    let lambda = eig.values[1];
    if !(-1e-9..=2.0 + 1e-9).contains(&lambda) {
        return Err(Error::numerical(format!(
            "normalized Laplacian eigenvalue {lambda} outside [0,2]"
        )));
    }
    Ok(lambda.clamp(0.0, 2.0))
}

/// Summary of a graph's expansion: gap, the Cheeger lower bound lambda/2 on
/// conductance, the exact conductance when enumeration is feasible, and the
/// minimum positive degree.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralProfile {
    pub lambda: f64,
    pub conductance_lb: f64,
    pub conductance_exact: Option<f64>,
    pub min_degree: usize,
}

pub fn spectral_profile(g: &Graph) -> Result<SpectralProfile> {
    let lambda = spectral_gap(g)?;
    let positive = g.positive_degree_vertices();
    let min_degree = positive.iter().map(|&v| g.degree(v)).min().unwrap_or(0);
    let conductance_exact = if g.n() <= EXACT_CONDUCTANCE_MAX_N && g.edge_count() > 0 {
        Some(conductance_exact(g)?.0)
    } else {
        None
    };
    Ok(SpectralProfile {
        lambda,
        conductance_lb: lambda / 2.0,
        conductance_exact,
        min_degree,
    })
}

/// Exact minimum conductance by Gray-code enumeration of all cuts. Ties are
/// broken toward the lexicographically smallest reported side.
pub fn conductance_exact(g: &Graph) -> Result<(f64, Cut)> {
    let n = g.n();
    if n > EXACT_CONDUCTANCE_MAX_N {
        return Err(Error::contract(format!(
            "exact conductance enumerates 2^(n-1) cuts; n={n} > {EXACT_CONDUCTANCE_MAX_N}. \
             Use spectral_gap / sweep_cut bounds instead"
        )));
    }
    if n < 2 || g.edge_count() == 0 {
        return Err(Error::contract(
            "conductance undefined without edges and two vertices",
        ));
    }
    let total_vol = g.volume();
    // Enumerate subsets containing vertex 0; flip one vertex per step in
    // Gray-code order, maintaining volume and crossing count incrementally.
    let mut in_side = vec![false; n];
    in_side[0] = true;
    let mut vol = g.degree(0);
    let mut crossing = g.degree(0);
    let mut best: Option<(usize, usize, Vec<u32>)> = None;
    let mut consider = |crossing: usize, vol: usize, in_side: &Vec<bool>| {
        let min_vol = vol.min(total_vol - vol);
        if min_vol == 0 {
            return;
        }
        let candidate_better = match &best {
            None => true,
            Some((bc, bm, bside)) => match ratio_less((crossing, min_vol), (*bc, *bm)) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    let side: Vec<u32> = (0..n as u32).filter(|&v| in_side[v as usize]).collect();
                    let cand = Cut::normalized(g, side, crossing).side;
                    cand < *bside
                }
            },
        };
        if candidate_better {
            let side: Vec<u32> = (0..n as u32).filter(|&v| in_side[v as usize]).collect();
            let cut = Cut::normalized(g, side, crossing);
            best = Some((crossing, min_vol, cut.side));
        }
    };
    consider(crossing, vol, &in_side);
    let free = n - 1; // vertices 1..n toggle
    for code in 1u64..(1u64 << free) {
        let bit = code.trailing_zeros() as usize;
        let v = (bit + 1) as u32;
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
            // in_count counted neighbors inside while v was inside.
            crossing = crossing + 2 * in_count - deg;
        }
        if vol < total_vol {
            consider(crossing, vol, &in_side);
        }
    }
    let (crossing, min_vol, side) = best.ok_or_else(|| {
        Error::contract("conductance undefined: every cut has a zero-volume side")
    })?;
    let cut = Cut::normalized(g, side, crossing);
    Ok((crossing as f64 / min_vol as f64, cut))
}

fn sweep_over_ordering(g: &Graph, order: &[u32]) -> Option<(usize, usize, Vec<u32>)> {
    let total_vol = g.volume();
    let mut in_side = vec![false; g.n()];
    let mut vol = 0usize;
    let mut crossing = 0usize;
    let mut best: Option<(usize, usize, usize)> = None; // crossing, min_vol, prefix len
    for (k, &v) in order.iter().enumerate().take(order.len() - 1) {
        let deg = g.degree(v);
        let in_count = g
            .neighbors(v)
            .iter()
            .filter(|&&w| in_side[w as usize])
            .count();
        in_side[v as usize] = true;
        vol += deg;
        crossing = crossing + deg - 2 * in_count;
        let min_vol = vol.min(total_vol - vol);
        if min_vol == 0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bc, bm, _)) => match ratio_less((crossing, min_vol), (*bc, *bm)) {
                std::cmp::Ordering::Less => true,
                // Equal conductance: prefer the smaller-volume side.
                std::cmp::Ordering::Equal => min_vol < *bm,
                std::cmp::Ordering::Greater => false,
            },
        };
        if better {
            best = Some((crossing, min_vol, k + 1));
        }
    }
    best.map(|(c, m, len)| (c, m, order[..len].to_vec()))
}

fn fiedler_orderings(g: &Graph, how_many: usize) -> Result<(f64, Vec<Vec<u32>>)> {
    let (l, verts) = g.normalized_laplacian();
    if verts.len() != g.n() {
        return Err(Error::contract(
            "sweep cut requires a degree-positive graph",
        ));
    }
    let eig = sym_eigen(&l);
    let lambda = eig.values[1].clamp(0.0, 2.0);
    let mut orderings = Vec::new();
    for col in 1..=how_many.min(g.n() - 1) {
        // Sort by D^{-1/2} f with index tie-break for determinism.
        let mut order: Vec<u32> = (0..g.n() as u32).collect();
        let score: Vec<f64> = (0..g.n())
            .map(|i| eig.vectors[(i, col)] / (g.degree(i as u32) as f64).sqrt())
            .collect();
        order.sort_by(|&a, &b| {
            score[a as usize]
                .total_cmp(&score[b as usize])
                .then(a.cmp(&b))
        });
        orderings.push(order);
    }
    Ok((lambda, orderings))
}

/// Fiedler sweep cut. The returned cut is checked against the Cheeger
/// guarantee `conductance <= sqrt(2 lambda)`; a violation is a numerical
/// failure, not a silently bad cut.
pub fn sweep_cut(g: &Graph) -> Result<Cut> {
    let (count, _) = g.components();
    if count != 1 {
        return Err(Error::contract("sweep cut requires a connected graph"));
    }
    if g.n() < 2 {
        return Err(Error::contract("sweep cut needs at least 2 vertices"));
    }
    let (lambda, orderings) = fiedler_orderings(g, 1)?;
    let (crossing, _, side) = sweep_over_ordering(g, &orderings[0])
        .ok_or_else(|| Error::numerical("sweep produced no valid prefix cut"))?;
    let cut = Cut::normalized(g, side, crossing);
    let bound = (2.0 * lambda).sqrt();
    if cut.conductance() > bound + 1e-9 {
        return Err(Error::numerical(format!(
            "Cheeger guarantee violated: sweep conductance {} > sqrt(2 lambda) = {}",
            cut.conductance(),
            bound
        )));
    }
    Ok(cut)
}

/// Best sweep cut over the first `k` nontrivial eigenvectors. Used when the
/// single Fiedler sweep fails to certify or split.
pub fn sweep_cut_multi(g: &Graph, k: usize) -> Result<Cut> {
    let (count, _) = g.components();
    if count != 1 || g.n() < 2 {
        return Err(Error::contract("multi-sweep requires a connected graph"));
    }
    let (_, orderings) = fiedler_orderings(g, k)?;
    let mut best: Option<(usize, usize, Vec<u32>)> = None;
    for order in &orderings {
        if let Some((c, m, side)) = sweep_over_ordering(g, order) {
            let better = match &best {
                None => true,
                Some((bc, bm, _)) => ratio_less((c, m), (*bc, *bm)) == std::cmp::Ordering::Less,
            };
            if better {
                best = Some((c, m, side));
            }
        }
    }
    let (crossing, _, side) =
        best.ok_or_else(|| Error::numerical("multi-sweep produced no valid cut"))?;
    Ok(Cut::normalized(g, side, crossing))
}

/// Effective resistance with unit resistors; disconnected pairs are a value,
/// not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Resistance {
    Finite(f64),
    Infinite,
}

impl Resistance {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Resistance::Finite(r) => Some(*r),
            Resistance::Infinite => None,
        }
    }
}

/// Precomputed Laplacian pseudoinverse for repeated resistance queries.
/// Disconnection is decided by union-find, never by pseudoinverse magnitude.
pub struct ResistanceOracle {
    pinv: DMatrix<f64>,
    labels: Vec<usize>,
}

impl ResistanceOracle {
    pub fn new(g: &Graph) -> ResistanceOracle {
        let (_, labels) = g.components();
        let pinv = sym_eigen(&g.laplacian()).pseudoinverse();
        ResistanceOracle { pinv, labels }
    }

    pub fn resistance(&self, u: u32, v: u32) -> Result<Resistance> {
        if u == v {
            return Err(Error::contract("effective resistance requires u != v"));
        }
        if self.labels[u as usize] != self.labels[v as usize] {
            return Ok(Resistance::Infinite);
        }
        let (u, v) = (u as usize, v as usize);
        let r = self.pinv[(u, u)] + self.pinv[(v, v)] - 2.0 * self.pinv[(u, v)];
        Ok(Resistance::Finite(r))
    }
}

/// R(u,v) = b^T L^+ b.
pub fn effective_resistance(g: &Graph, u: u32, v: u32) -> Result<Resistance> {
    ResistanceOracle::new(g).resistance(u, v)
}

/// The lazy-walk matrix M = I - (1/2) * normalized Laplacian, on the
/// degree-positive vertex set. All eigenvalues lie in [0, 1]; the top one is
/// exactly 1 per connected component.
pub fn walk_matrix(g: &Graph) -> Result<(DMatrix<f64>, Vec<u32>)> {
    let (l, verts) = g.normalized_laplacian();
    if verts.is_empty() {
        return Err(Error::contract(
            "walk matrix needs a degree-positive vertex",
        ));
    }
    let k = verts.len();
    let m = DMatrix::identity(k, k) - l * 0.5;
    Ok((m, verts))
}

pub fn trace_power(m: &DMatrix<f64>, t: u32) -> Result<f64> {
    if t < 1 {
        return Err(Error::contract("trace power requires t >= 1"));
    }
    Ok(matrix_power(m, t).trace())
}

/// Upper bound (tr(M^t) - 1)^(1/t) on the second largest eigenvalue of M.
pub fn lambda2_upper(m: &DMatrix<f64>, t: u32) -> Result<f64> {
    let tr = trace_power(m, t)?;
    if tr < 1.0 - 1e-9 {
        return Err(Error::numerical(format!(
            "tr(M^{t}) = {tr} < 1; walk matrix is miscomputed"
        )));
    }
    Ok((tr - 1.0).max(0.0).powf(1.0 / t as f64))
}

/// Entrywise walk-power bound report.
#[derive(Debug, Clone, Serialize)]
pub struct EntryBoundReport {
    pub k: u32,
    pub eps: f64,
    pub violations: usize,
    /// Smallest bound - entry over all pairs; negative means a violation.
    pub min_slack: f64,
    /// Largest bound - entry (loosest pair).
    pub max_slack: f64,
    pub worst_pair: (u32, u32),
}

impl EntryBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks (M^k)_{uv} <= sqrt(d_u d_v) (1/D + (1/d_min - 1/D) e^{-eps^2 k/4})
/// for every vertex pair, where D is the total degree. The input must be a
/// certified expander: spectral gap at least eps^2 / 2.
pub fn entry_bound_check(g: &Graph, eps: f64, k: u32) -> Result<EntryBoundReport> {
    if k < 1 {
        return Err(Error::contract("entry bound requires k >= 1"));
    }
    let lambda = spectral_gap(g)?;
    if lambda + 1e-12 < eps * eps / 2.0 {
        return Err(Error::contract(format!(
            "input not certified: spectral gap {lambda} < eps^2/2 = {}",
            eps * eps / 2.0
        )));
    }
    let (m, verts) = walk_matrix(g)?;
    let mk = matrix_power(&m, k);
    let total_degree: f64 = verts.iter().map(|&v| g.degree(v) as f64).sum();
    let d_min = verts.iter().map(|&v| g.degree(v)).min().unwrap() as f64;
    let decay = (-eps * eps * k as f64 / 4.0).exp();
    let mut report = EntryBoundReport {
        k,
        eps,
        violations: 0,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
        worst_pair: (0, 0),
    };
    for (i, &u) in verts.iter().enumerate() {
        for (j, &v) in verts.iter().enumerate() {
            let du = g.degree(u) as f64;
            let dv = g.degree(v) as f64;
            let bound = (du * dv).sqrt()
                * (1.0 / total_degree + (1.0 / d_min - 1.0 / total_degree) * decay);
            let slack = bound - mk[(i, j)];
            if slack < report.min_slack {
                report.min_slack = slack;
                report.worst_pair = (u, v);
            }
            report.max_slack = report.max_slack.max(slack);
            if slack < -1e-9 {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// How a part was certified as an eps-expander: exact enumeration, or the
/// sound Cheeger direction (lambda >= 2 eps implies conductance >= eps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", content = "value", rename_all = "snake_case")]
pub enum ExpanderCertificate {
    Exact(f64),
    Spectral(f64),
}

impl ExpanderCertificate {
    /// Certified lower bound on the conductance.
    pub fn certified_conductance(&self) -> f64 {
        match self {
            ExpanderCertificate::Exact(phi) => *phi,
            ExpanderCertificate::Spectral(lambda) => lambda / 2.0,
        }
    }
}

/// Tries to certify `g` as an eps-expander: exact conductance when the graph
/// is small enough to enumerate, otherwise lambda >= 2 eps. `None` means "not
/// certified", which is weaker than "not an expander" for large graphs.
pub fn certify_expander(g: &Graph, eps: f64) -> Result<Option<ExpanderCertificate>> {
    if g.n() <= EXACT_CONDUCTANCE_MAX_N {
        let (phi, _) = conductance_exact(g)?;
        return Ok((phi >= eps).then_some(ExpanderCertificate::Exact(phi)));
    }
    let lambda = spectral_gap(g)?;
    Ok((lambda >= 2.0 * eps).then_some(ExpanderCertificate::Spectral(lambda)))
}
