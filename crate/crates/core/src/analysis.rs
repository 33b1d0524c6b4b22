//! KL divergence between sketches of neighboring graphs, and the seeded
//! experiments built on it: the scaling estimate over the chain
//! distribution, the theta-distinguishing likelihood test, and the
//! balanced-path resistance audit.
//!
//! Removing one edge with effective resistance R from a graph changes the
//! sketch-row distribution by KL = (-ln(1-R) - R) / 2 exactly: the
//! whitened covariance I - w w^T has one eigenvalue 1 - R and the rest 1.
//! The general zero-mean Gaussian evaluator is kept alongside as an
//! independent oracle for that closed form.

use crate::error::{Error, Result};
use crate::graph::{pair_index, Graph};
use crate::instances::{ChainInstance, ThetaInstance};
use crate::linalg::{sym_eigen, SymEigen};
use crate::rng::{derive_seed, keyed_uniform};
use crate::sketch::{SamplingMatrix, Sketch};
use crate::spectral::{effective_resistance, Resistance, ResistanceOracle};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::str::FromStr;

/// Treat an edge as a bridge (span mismatch, infinite KL) when its
/// effective resistance is within this of 1.
pub const BRIDGE_TOLERANCE: f64 = 1e-9;

const SPAN_ANGLE_TOLERANCE: f64 = 1e-7;

/// KL divergence, in nats, between the single-row sketch of `G - e` and the
/// sketch of `G`, as a function of the effective resistance of `e` in `G`.
pub fn kl_closed_form(r_eff: f64) -> f64 {
    0.5 * (-(1.0 - r_eff).ln() - r_eff)
}

/// KL report for one probed edge.
#[derive(Debug, Clone, Serialize)]
pub struct KlReport {
    pub r_eff: f64,
    /// Exact KL in nats; infinite for bridges.
    pub kl_exact: f64,
    /// The R/4 bound that applies whenever R <= 1/2.
    pub kl_bound_quarter: f64,
    pub kl_min1: f64,
    pub bridge: bool,
}

/// Exact KL between the sketches of `G - e` and `G` for an edge of `G`.
pub fn kl_edge_exact(g: &Graph, edge: (u32, u32)) -> Result<KlReport> {
    let (u, v) = edge;
    if !g.has_edge(u, v) {
        return Err(Error::contract(format!("({u},{v}) is not an edge")));
    }
    let r_eff = match effective_resistance(g, u, v)? {
        Resistance::Finite(r) => r,
        Resistance::Infinite => return Err(Error::numerical("edge endpoints disconnected")),
    };
    let bridge = r_eff >= 1.0 - BRIDGE_TOLERANCE;
    let kl_exact = if bridge {
        f64::INFINITY
    } else {
        kl_closed_form(r_eff)
    };
    Ok(KlReport {
        r_eff,
        kl_exact,
        kl_bound_quarter: r_eff / 4.0,
        kl_min1: kl_exact.min(1.0),
        bridge,
    })
}

/// Outcome of the general evaluator: a value, or distributions supported on
/// different subspaces (semantically infinite divergence).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KlOutcome {
    Nats(f64),
    SpanMismatch,
}

fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0.0;
    }
    sym_eigen(&(m.transpose() * m))
        .values
        .iter()
        .fold(0.0f64, |a, &v| a.max(v.max(0.0)))
        .sqrt()
}

fn spans_match(a: &SymEigen, b: &SymEigen) -> bool {
    if a.rank() != b.rank() {
        return false;
    }
    let (ua, ub) = (a.range_basis(), b.range_basis());
    let residual = &ua - &ub * (ub.transpose() * &ua);
    operator_norm(&residual) <= SPAN_ANGLE_TOLERANCE
}

/// KL divergence between zero-mean Gaussians with PSD covariances of equal
/// span: with A^T A = sigma2 on the span, KL = [-ln det M - k + tr M] / 2
/// for M = (A^+)^T sigma1 A^+.
pub fn kl_gaussian_zero_mean(sigma1: &DMatrix<f64>, sigma2: &DMatrix<f64>) -> Result<KlOutcome> {
    if sigma1.nrows() != sigma1.ncols() || sigma2.nrows() != sigma2.ncols() {
        return Err(Error::contract("covariances must be square"));
    }
    if sigma1.nrows() != sigma2.nrows() {
        return Err(Error::contract("covariance dimensions differ"));
    }
    for (name, m) in [("sigma1", sigma1), ("sigma2", sigma2)] {
        if operator_norm(&(m - m.transpose())) > 1e-9 {
            return Err(Error::contract(format!("{name} is not symmetric")));
        }
    }
    let e1 = sym_eigen(sigma1);
    let e2 = sym_eigen(sigma2);
    for (name, e) in [("sigma1", &e1), ("sigma2", &e2)] {
        if e.values
            .iter()
            .any(|&v| v < -1e-9 * e.values[e.values.len() - 1].max(1.0))
        {
            return Err(Error::contract(format!("{name} is not PSD")));
        }
    }
    if !spans_match(&e1, &e2) {
        return Ok(KlOutcome::SpanMismatch);
    }
    let k = e2.rank();
    if k == 0 {
        return Ok(KlOutcome::Nats(0.0));
    }
    let cutoff = e2.rank_cutoff();
    let dim = e2.values.len();
    let mut pinv_half = DMatrix::zeros(dim, k); // columns v_i / sqrt(lambda_i)
    let mut col = 0;
    for i in 0..dim {
        if e2.values[i].abs() > cutoff {
            pinv_half.set_column(col, &(e2.vectors.column(i) / e2.values[i].sqrt()));
            col += 1;
        }
    }
    let whitened = pinv_half.transpose() * sigma1 * &pinv_half;
    let we = sym_eigen(&whitened);
    let mut log_det = 0.0;
    let mut trace = 0.0;
    for &lambda in we.values.iter() {
        if lambda <= 0.0 {
            // Equal spans make the whitened covariance positive definite;
            // hitting zero here means the span test was fooled by noise.
            return Ok(KlOutcome::SpanMismatch);
        }
        log_det += lambda.ln();
        trace += lambda;
    }
    Ok(KlOutcome::Nats(
        (-log_det - k as f64 + trace).max(0.0) / 2.0,
    ))
}

/// Checks ln det(I + A) >= tr(A) - tr(A^2) for a symmetric A with spectral
/// norm at most 1/2. A `false` indicates an implementation bug somewhere.
pub fn logdet_check(a: &DMatrix<f64>) -> Result<bool> {
    if a.nrows() != a.ncols() {
        return Err(Error::contract("matrix must be square"));
    }
    if operator_norm(&(a - a.transpose())) > 1e-9 {
        return Err(Error::contract("matrix must be symmetric"));
    }
    let eig = sym_eigen(a);
    let norm = eig.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if norm > 0.5 + 1e-12 {
        return Err(Error::contract(format!("spectral norm {norm} exceeds 1/2")));
    }
    let log_det: f64 = eig.values.iter().map(|&l| (1.0 + l).ln()).sum();
    let tr: f64 = eig.values.iter().sum();
    let tr_sq: f64 = eig.values.iter().map(|&l| l * l).sum();
    Ok(log_det >= tr - tr_sq - 1e-9)
}

/// Sampling-matrix family used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerSpec {
    Full,
    Bernoulli(f64),
    Level(u32),
}

impl SamplerSpec {
    pub fn matrix(&self, n: usize, sample_seed: u64, label: u64) -> SamplingMatrix {
        match *self {
            SamplerSpec::Full => SamplingMatrix::full(n),
            SamplerSpec::Bernoulli(p) => SamplingMatrix::bernoulli(n, p, sample_seed, label),
            SamplerSpec::Level(j) => SamplingMatrix::level(n, j, sample_seed, label),
        }
    }
}

impl std::fmt::Display for SamplerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerSpec::Full => write!(f, "full"),
            SamplerSpec::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            SamplerSpec::Level(j) => write!(f, "level:{j}"),
        }
    }
}

impl FromStr for SamplerSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<SamplerSpec> {
        if s == "full" {
            return Ok(SamplerSpec::Full);
        }
        if let Some(p) = s.strip_prefix("bernoulli:") {
            let p: f64 = p
                .parse()
                .map_err(|_| Error::contract(format!("bad bernoulli probability in `{s}`")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::contract("bernoulli probability outside [0,1]"));
            }
            return Ok(SamplerSpec::Bernoulli(p));
        }
        if let Some(j) = s.strip_prefix("level:") {
            let j: u32 = j
                .parse()
                .map_err(|_| Error::contract(format!("bad level in `{s}`")))?;
            return Ok(SamplerSpec::Level(j));
        }
        Err(Error::contract(format!(
            "unknown sampler `{s}` (expected full, bernoulli:<p>, or level:<j>)"
        )))
    }
}

/// Compensated (Neumaier) summation so parallel-trial aggregation is
/// deterministic given the per-trial values in index order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let t = values.len();
    if t == 0 {
        return (0.0, 0.0);
    }
    let mean = neumaier_sum(values.iter().copied()) / t as f64;
    if t == 1 {
        return (mean, 0.0);
    }
    let var = neumaier_sum(values.iter().map(|&v| (v - mean) * (v - mean))) / (t as f64 - 1.0);
    (mean, (var / t as f64).sqrt())
}

fn collect_trials<F: Fn(u64) -> f64 + Sync>(trials: usize, f: F) -> Vec<f64> {
    let mut out: Vec<(u64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| (t, f(t)))
        .collect();
    out.sort_by_key(|&(t, _)| t);
    out.into_iter().map(|(_, v)| v).collect()
}

/// One row of the scaling curve: the Monte Carlo mean of min(1, KL) for a
/// single sampled row over chain instances.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub d: u32,
    pub s: usize,
    pub sampler: String,
    pub trials: usize,
    pub mean_min1_kl: f64,
    pub stderr: f64,
}

/// Estimates E[min(1, KL)] over instances (G, e*) for one fixed sampling
/// matrix. A trial contributes 0 when e* is unsampled (both sketch
/// distributions coincide), 1 when e* bridges the sampled subgraph, and the
/// closed form at the effective resistance of e* in G(S) + e* otherwise.
pub fn estimate_scaling(
    sampler: SamplerSpec,
    n: usize,
    d: u32,
    trials: usize,
    seed: u64,
) -> Result<ScalingRow> {
    if trials == 0 {
        return Err(Error::contract("trials must be >= 1"));
    }
    ChainInstance::sample(n, d, 0)?; // validate (n, d) eagerly
    let matrix = sampler.matrix(n, derive_seed(seed, "sampler", 0), 0);
    let values = collect_trials(trials, |t| {
        let inst = ChainInstance::sample(n, d, derive_seed(seed, "trial", t)).unwrap();
        trial_min1_kl(&inst, &matrix)
    });
    let (mean, stderr) = mean_and_stderr(&values);
    Ok(ScalingRow {
        n,
        d,
        s: 1,
        sampler: sampler.to_string(),
        trials,
        mean_min1_kl: mean,
        stderr,
    })
}

fn trial_min1_kl(inst: &ChainInstance, matrix: &SamplingMatrix) -> f64 {
    let (u, v) = inst.e_star;
    let n = inst.graph.n();
    if !matrix.contains(pair_index(u.min(v), u.max(v), n)) {
        return 0.0;
    }
    let sampled = Graph::new(
        n,
        inst.graph
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| matrix.contains(pair_index(a, b, n))),
    )
    .unwrap();
    let with_estar = sampled.with_edge(u, v).unwrap();
    let r = effective_resistance(&with_estar, u, v)
        .expect("u != v")
        .finite()
        .expect("e* connects its endpoints");
    if r >= 1.0 - BRIDGE_TOLERANCE {
        1.0
    } else {
        kl_closed_form(r).min(1.0)
    }
}

/// One row of the distinguishing curve.
#[derive(Debug, Clone, Serialize)]
pub struct DistinguishRow {
    pub n: usize,
    pub d: u32,
    pub s: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub tvd_lb: f64,
}

/// Full outcome: the CSV row plus the mean analytic KL sum used by the
/// Pinsker consistency check (infinite when bridge trials occurred).
#[derive(Debug, Clone)]
pub struct DistinguishOutcome {
    pub row: DistinguishRow,
    pub mean_kl_sum: f64,
}

/// Likelihood-ratio distinguishing experiment: per trial, sketch the
/// realized graph of a theta instance with `s` rows and decide theta from
/// the two known covariances L(G(S_i)) and L(G(S_i)) + b b^T, summing
/// log-likelihood ratios across rows (rows are independent streams). The
/// decision uses only the sampling matrices, G, e*, and the projections.
pub fn distinguish_theta(
    n: usize,
    d: u32,
    s: usize,
    sampler: SamplerSpec,
    trials: usize,
    seed: u64,
) -> Result<DistinguishOutcome> {
    if trials == 0 {
        return Err(Error::contract("trials must be >= 1"));
    }
    ChainInstance::sample(n, d, 0)?;
    let results: Vec<(f64, f64)> = {
        let mut out: Vec<(u64, (f64, f64))> = (0..trials as u64)
            .into_par_iter()
            .map(|t| (t, distinguish_trial(n, d, s, sampler, seed, t)))
            .collect();
        out.sort_by_key(|&(t, _)| t);
        out.into_iter().map(|(_, v)| v).collect()
    };
    let successes = neumaier_sum(results.iter().map(|&(ok, _)| ok));
    let rate = successes / trials as f64;
    let mean_kl_sum = neumaier_sum(results.iter().map(|&(_, kl)| kl)) / trials as f64;
    Ok(DistinguishOutcome {
        row: DistinguishRow {
            n,
            d,
            s,
            trials,
            success_rate: rate,
            tvd_lb: 2.0 * (rate - 0.5),
        },
        mean_kl_sum,
    })
}

fn distinguish_trial(
    n: usize,
    d: u32,
    s: usize,
    sampler: SamplerSpec,
    seed: u64,
    t: u64,
) -> (f64, f64) {
    let inst = ThetaInstance::sample(n, d, derive_seed(seed, "trial", t)).unwrap();
    let (u_star, v_star) = inst.base.e_star;
    let estar_pair = pair_index(u_star.min(v_star), u_star.max(v_star), n);
    let sample_seed = derive_seed(seed, "trial-sampling", t);
    let matrices: Vec<SamplingMatrix> = (0..s)
        .map(|i| sampler.matrix(n, sample_seed, i as u64))
        .collect();
    let gauss_seed = derive_seed(seed, "trial-gauss", t);
    let sketch = Sketch::of_graph(&inst.realized, matrices.clone(), gauss_seed);

    // Group rows by sampling matrix so the shared-covariance case (full
    // sampling) eigendecomposes once.
    let mut llr_total = 0.0f64;
    let mut kl_sum = 0.0f64;
    let mut decided: Option<bool> = None;
    let mut row = 0usize;
    while row < s {
        let mut group_end = row + 1;
        while group_end < s && matrices[group_end] == matrices[row] {
            group_end += 1;
        }
        let matrix = &matrices[row];
        if !matrix.contains(estar_pair) {
            row = group_end;
            continue;
        }
        let sampled_chain = Graph::new(
            n,
            inst.base
                .graph
                .edges()
                .iter()
                .copied()
                .filter(|&(a, b)| matrix.contains(pair_index(a, b, n))),
        )
        .unwrap();
        let mut uf = sampled_chain.union_find();
        if uf.connected(u_star, v_star) {
            // Shared-span case: Sherman-Morrison likelihood ratio.
            let pinv = sym_eigen(&sampled_chain.laplacian()).pseudoinverse();
            let mut b = DVector::zeros(n);
            b[u_star as usize] = 1.0;
            b[v_star as usize] = -1.0;
            let y = &pinv * &b;
            let r0 = b.dot(&y);
            let kl_per_row = kl_closed_form(r0 / (1.0 + r0));
            for i in row..group_end {
                let p = DVector::from_vec(sketch.projection(i).values());
                let dot = y.dot(&p);
                llr_total += 0.5 * (dot * dot / (1.0 + r0) - (1.0 + r0).ln());
                kl_sum += kl_per_row;
            }
        } else {
            // Span-mismatch case: under theta = 0 the projection is exactly
            // orthogonal to the component indicator of u* (fixed-point sums
            // cancel); under theta = 1 the overlap is the e* Gaussian.
            let labels = uf.labels();
            let comp: Vec<u32> = (0..n as u32)
                .filter(|&v| labels[v as usize] == labels[u_star as usize])
                .collect();
            let overlaps = sketch.column_combine_fixed(&comp);
            for i in row..group_end {
                if decided.is_none() {
                    decided = Some(overlaps[i] != 0);
                }
                kl_sum = f64::INFINITY;
            }
        }
        row = group_end;
    }
    let guess = match decided {
        Some(g) => g,
        None => {
            if llr_total > 0.0 {
                true
            } else if llr_total < 0.0 {
                false
            } else {
                keyed_uniform(derive_seed(seed, "tie", t), 9, 0) & 1 == 1
            }
        }
    };
    ((guess == inst.theta) as u8 as f64, kl_sum)
}

/// Resistance audit of a balanced path: the fitted constant is the largest
/// ratio of a pair resistance to 1/(phi^2 d_min) + d/(phi^2 vol(U_1)).
#[derive(Debug, Clone, Serialize)]
pub struct ResistanceAuditReport {
    pub pairs_tested: usize,
    pub max_fitted_constant: f64,
    pub bound_term: f64,
    /// Set when the chain is disconnected; resistances are infinite and the
    /// audit's precondition fails.
    pub disconnected: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum PairSelection {
    Exhaustive,
    Sampled(usize),
}

pub fn resistance_audit_balanced_path(
    g: &Graph,
    layers: &[u32],
    phi: f64,
    pairs: PairSelection,
    seed: u64,
) -> Result<ResistanceAuditReport> {
    assert_eq!(layers.len(), g.n());
    let n = g.n();
    if n < 2 {
        return Err(Error::contract("audit needs at least two vertices"));
    }
    let d = (*layers.iter().max().unwrap() + 1).max(1);
    let min_degree = (0..n as u32).map(|v| g.degree(v)).min().unwrap();
    let first_window: Vec<u32> = (0..n as u32).filter(|&v| layers[v as usize] <= 1).collect();
    let vol_u1 = g.volume_of(&first_window);
    let (components, _) = g.components();
    if components != 1 || min_degree == 0 || vol_u1 == 0 {
        return Ok(ResistanceAuditReport {
            pairs_tested: 0,
            max_fitted_constant: f64::INFINITY,
            bound_term: f64::NAN,
            disconnected: true,
        });
    }
    let bound_term = 1.0 / (phi * phi * min_degree as f64) + d as f64 / (phi * phi * vol_u1 as f64);
    let oracle = ResistanceOracle::new(g);
    let mut max_ratio = 0.0f64;
    let mut tested = 0usize;
    let mut probe = |u: u32, v: u32| -> Result<()> {
        if let Resistance::Finite(r) = oracle.resistance(u, v)? {
            max_ratio = max_ratio.max(r / bound_term);
            tested += 1;
        }
        Ok(())
    };
    match pairs {
        PairSelection::Exhaustive => {
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    probe(u, v)?;
                }
            }
        }
        PairSelection::Sampled(count) => {
            let key = derive_seed(seed, "audit-pairs", 0);
            for i in 0..count as u64 {
                let pair =
                    crate::rng::bounded(keyed_uniform(key, 1, i), crate::graph::pair_count(n));
                let (u, v) = crate::graph::pair_unindex(pair, n);
                probe(u, v)?;
            }
        }
    }
    Ok(ResistanceAuditReport {
        pairs_tested: tested,
        max_fitted_constant: max_ratio,
        bound_term,
        disconnected: false,
    })
}
