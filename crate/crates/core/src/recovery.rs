//! Sparse-recovery primitives inside the Gaussian sketch model: squared-norm
//! estimation, an l0-sampler, l2 heavy hitters, and sketched spanning-forest
//! recovery.
//!
//! Every estimator row is of the sketch-model form: a public sampling rule
//! composed with a hidden Gaussian stream. Decoders consume sampling
//! descriptors and row values only; the functions that interpret values take
//! no Gaussian seed anywhere in their signatures.
//!
//! Vectors are sparse signed supports. The l0-sampler requires entries in
//! {-1, 0, +1} (cut vectors of simple graphs are of this shape), which is
//! what its singleton-norm window relies on; the heavy-hitter sketch accepts
//! small integer weights expressed by repeating an index.

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, pair_unindex, Graph};
use crate::rng::{derive_seed, quantize, GaussianStream};
use crate::sketch::{SamplingMatrix, Selector};
use crate::unionfind::UnionFind;
use serde::Serialize;

/// Sparse signed vector: (index, sign).
pub type SignedVec = Vec<(u64, i8)>;

/// Mean of squared row values: an unbiased estimate of the squared norm of
/// the sketched vector.
pub fn l2_estimate(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// Repetitions per squared-norm estimate: 24 log2(universe) rows.
pub fn reps_for(universe: u64) -> u32 {
    24 * bits_for(universe).max(1)
}

fn bits_for(universe: u64) -> u32 {
    if universe <= 1 {
        0
    } else {
        64 - (universe - 1).leading_zeros()
    }
}

/// Full-support Gaussian rows applied to a signed vector; pair with
/// [`l2_estimate`] for direct norm estimation.
pub fn l2_sketch(x: &SignedVec, rows: u32, gauss_seed: u64) -> Vec<f64> {
    (0..rows)
        .map(|r| {
            let stream = GaussianStream::new(gauss_seed, r as u64);
            let mut acc: i128 = 0;
            for &(k, sign) in x {
                acc += sign as i128 * quantize(stream.value(k));
            }
            crate::rng::dequantize(acc)
        })
        .collect()
}

/// An estimate "is approximately zero" iff below this; singletons of a
/// {-1,0,1} vector have squared norm exactly 1.
pub const NEAR_ZERO: f64 = 0.1;
const SINGLETON_LO: f64 = 2.0 / 3.0;
const SINGLETON_HI: f64 = 4.0 / 3.0;

/// Public parameters of one l0-sampler: subsampling levels over the
/// universe, per-estimate repetitions, and enough independent batches to
/// push the failure probability below delta.
#[derive(Debug, Clone, Serialize)]
pub struct L0Params {
    pub universe: u64,
    pub delta: f64,
    pub bits: u32,
    pub levels: u32,
    pub reps: u32,
    pub batches: u32,
    /// Public sampling seed; defines the level subsets.
    pub sample_seed: u64,
}

impl L0Params {
    pub fn new(universe: u64, delta: f64, sample_seed: u64) -> L0Params {
        assert!(universe >= 1);
        assert!(delta > 0.0 && delta < 1.0);
        let bits = bits_for(universe);
        // One batch holds a verified singleton with constant probability;
        // independent batches drive the failure under delta.
        let batches = (2.2 * (1.0 / delta).ln()).ceil().max(1.0) as u32;
        L0Params {
            universe,
            delta,
            bits,
            levels: bits + 1,
            reps: reps_for(universe),
            batches,
            sample_seed,
        }
    }

    /// Estimator slots per level: the level norm plus one per (bit, side).
    fn slots(&self) -> u64 {
        1 + 2 * self.bits as u64
    }

    /// Exact number of sketch rows.
    pub fn row_count(&self) -> u64 {
        self.batches as u64 * self.levels as u64 * self.slots() * self.reps as u64
    }

    fn batch_label(&self, batch: u32) -> u64 {
        derive_seed(self.sample_seed, "l0-batch", batch as u64)
    }

    /// Sampling rule of one estimator group (shared by its `reps` rows).
    /// Slot 0 is the plain level estimate; slot 1 + 2*bit + side restricts
    /// further to indices whose `bit` equals `side`.
    pub fn selector(&self, batch: u32, level: u32, slot: u64) -> Selector {
        let label = self.batch_label(batch);
        if slot == 0 {
            Selector::Level {
                j: level,
                sample_seed: self.sample_seed,
                label,
            }
        } else {
            let bit = ((slot - 1) / 2) as u32;
            let side = (slot - 1) % 2 == 1;
            Selector::LevelBit {
                j: level,
                bit,
                side,
                sample_seed: self.sample_seed,
                label,
            }
        }
    }

    /// Gaussian stream label of one row; contiguous over all rows.
    pub fn row_label(&self, batch: u32, level: u32, slot: u64, rep: u32) -> u64 {
        ((batch as u64 * self.levels as u64 + level as u64) * self.slots() + slot)
            * self.reps as u64
            + rep as u64
    }

    /// Every row as (sampling matrix over pair indices, Gaussian label);
    /// `n` is the vertex count whose pair universe this sampler covers.
    pub fn row_descriptors(&self, n: usize) -> Vec<(SamplingMatrix, u64)> {
        assert_eq!(pair_count(n), self.universe);
        let mut rows = Vec::with_capacity(self.row_count() as usize);
        for batch in 0..self.batches {
            for level in 0..self.levels {
                for slot in 0..self.slots() {
                    let selector = self.selector(batch, level, slot);
                    for rep in 0..self.reps {
                        rows.push((
                            SamplingMatrix {
                                n,
                                selector: selector.clone(),
                            },
                            self.row_label(batch, level, slot, rep),
                        ));
                    }
                }
            }
        }
        rows
    }
}

/// Row values of one (batch, level): the level norm estimate rows and the
/// per-(bit, side) restricted rows.
#[derive(Debug, Clone)]
pub struct LevelValues {
    pub norm: Vec<f64>,
    /// bit -> [side-0 values, side-1 values]
    pub bit_sides: Vec<[Vec<f64>; 2]>,
}

/// Decoder-facing value table of an l0 sketch.
#[derive(Debug, Clone)]
pub struct L0View {
    pub params: L0Params,
    /// batches x levels
    pub values: Vec<Vec<LevelValues>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L0Outcome {
    Index(u64),
    Fail,
}

fn group_values(
    params: &L0Params,
    gauss_seed: u64,
    members: &[(u64, i8)],
    batch: u32,
    level: u32,
    slot: u64,
) -> Vec<f64> {
    (0..params.reps)
        .map(|rep| {
            let stream = GaussianStream::new(gauss_seed, params.row_label(batch, level, slot, rep));
            let mut acc: i128 = 0;
            for &(k, sign) in members {
                acc += sign as i128 * quantize(stream.value(k));
            }
            crate::rng::dequantize(acc)
        })
        .collect()
}

fn level_values(
    params: &L0Params,
    gauss_seed: u64,
    x: &[(u64, i8)],
    batch: u32,
    level: u32,
) -> LevelValues {
    let level_selector = params.selector(batch, level, 0);
    let members: Vec<(u64, i8)> = x
        .iter()
        .copied()
        .filter(|&(k, _)| level_selector.contains(k))
        .collect();
    let norm = group_values(params, gauss_seed, &members, batch, level, 0);
    let bit_sides = (0..params.bits)
        .map(|bit| {
            let split = |side: u64| -> Vec<(u64, i8)> {
                members
                    .iter()
                    .copied()
                    .filter(|&(k, _)| (k >> bit) & 1 == side)
                    .collect()
            };
            let slot0 = 1 + 2 * bit as u64;
            [
                group_values(params, gauss_seed, &split(0), batch, level, slot0),
                group_values(params, gauss_seed, &split(1), batch, level, slot0 + 1),
            ]
        })
        .collect();
    LevelValues { norm, bit_sides }
}

/// Sketches a signed vector: evaluates every row. The sketcher holds the
/// Gaussian seed; the returned view does not.
pub fn l0_sketch(params: &L0Params, gauss_seed: u64, x: &SignedVec) -> L0View {
    let values = (0..params.batches)
        .map(|batch| {
            (0..params.levels)
                .map(|level| level_values(params, gauss_seed, x, batch, level))
                .collect()
        })
        .collect();
    L0View {
        params: params.clone(),
        values,
    }
}

/// Pure per-level decoder: detects a singleton level by its norm estimate,
/// reads the index off the bit-plane estimates (bit set iff the one-side
/// estimate exceeds half the level estimate), then verifies the claim: every
/// opposite bit side must be approximately zero and every matching side must
/// not be. The verification is what keeps zero coordinates out: any second
/// support element differs from the claim in some bit, lands in an opposite
/// side, and pushes that estimate near 1, far above the zero window.
fn singleton_from_level(params: &L0Params, lv: &LevelValues) -> Option<u64> {
    let norm_est = l2_estimate(&lv.norm);
    if !(SINGLETON_LO..=SINGLETON_HI).contains(&norm_est) {
        return None;
    }
    let mut claimed: u64 = 0;
    for bit in 0..params.bits {
        let one_side = l2_estimate(&lv.bit_sides[bit as usize][1]);
        if one_side > norm_est / 2.0 {
            claimed |= 1 << bit;
        }
    }
    if claimed >= params.universe {
        return None;
    }
    for bit in 0..params.bits {
        let side = ((claimed >> bit) & 1) as usize;
        let own = l2_estimate(&lv.bit_sides[bit as usize][side]);
        let opposite = l2_estimate(&lv.bit_sides[bit as usize][1 - side]);
        if opposite >= NEAR_ZERO || own < NEAR_ZERO {
            return None;
        }
    }
    Some(claimed)
}

/// Decodes a nonzero coordinate from the value table, or FAIL. Scans batches
/// and levels in order and returns the first verified singleton.
pub fn l0_decode(view: &L0View) -> L0Outcome {
    for batch_values in &view.values {
        for lv in batch_values {
            if let Some(idx) = singleton_from_level(&view.params, lv) {
                return L0Outcome::Index(idx);
            }
        }
    }
    L0Outcome::Fail
}

/// Lazy sketch-and-decode: evaluates estimator groups only until a batch
/// yields a verified singleton. The values computed are identical to the
/// corresponding entries of [`l0_sketch`] and the interpretation goes
/// through the same per-level decoder, so the outcome equals
/// `l0_decode(&l0_sketch(params, gauss_seed, x))`.
pub fn l0_query(params: &L0Params, gauss_seed: u64, x: &SignedVec) -> L0Outcome {
    for batch in 0..params.batches {
        for level in 0..params.levels {
            let lv = level_values(params, gauss_seed, x, batch, level);
            if let Some(idx) = singleton_from_level(params, &lv) {
                return L0Outcome::Index(idx);
            }
        }
    }
    L0Outcome::Fail
}

/// Heavy-hitter sketch parameters: bucketed Gaussian sums repeated over
/// independent hashings, plus full-support rows for the norm.
#[derive(Debug, Clone, Serialize)]
pub struct HhParams {
    pub universe: u64,
    pub phi: f64,
    pub buckets: u32,
    pub reps: u32,
    pub norm_rows: u32,
    pub sample_seed: u64,
}

/// Median of the chi-squared(1) distribution; dividing a median of squared
/// Gaussian values by this gives a consistent variance estimate.
const CHI2_MEDIAN: f64 = 0.454_936_423_119_572_8;

/// Accept an element when its corrected estimate reaches this fraction of
/// phi times the squared norm.
const HH_ACCEPT: f64 = 0.25;

impl HhParams {
    pub fn new(universe: u64, phi: f64, sample_seed: u64) -> Result<HhParams> {
        if !(0.0 < phi && phi < 1.0) {
            return Err(Error::contract(format!("phi must be in (0,1), got {phi}")));
        }
        // Buckets well beyond 1/phi keep collision inflation small, and the
        // repetition count has to beat the sampling noise of a median of
        // chi-squared values (about 2.1/sqrt(reps) relative); 96 log2(n)
        // repetitions put the accept threshold 4+ sigma away from both the
        // heavy and the light population.
        let hh_reps = 96 * bits_for(universe).max(1);
        Ok(HhParams {
            universe,
            phi,
            buckets: (64.0 / phi).ceil() as u32,
            reps: hh_reps,
            norm_rows: hh_reps,
            sample_seed,
        })
    }

    pub fn row_count(&self) -> u64 {
        self.reps as u64 * self.buckets as u64 + self.norm_rows as u64
    }

    fn bucket_of(&self, rep: u32, index: u64) -> u32 {
        crate::rng::bounded(
            crate::rng::keyed_uniform(self.sample_seed, 0x6868 + rep as u64, index),
            self.buckets as u64,
        ) as u32
    }

    fn bucket_row_label(&self, rep: u32, bucket: u32) -> u64 {
        rep as u64 * self.buckets as u64 + bucket as u64
    }
}

/// Decoder-facing heavy-hitter values.
#[derive(Debug, Clone)]
pub struct HhView {
    pub params: HhParams,
    /// rep -> bucket -> Gaussian bucket sum.
    pub bucket_values: Vec<Vec<f64>>,
    pub norm_values: Vec<f64>,
}

pub fn hh_sketch(params: &HhParams, gauss_seed: u64, x: &SignedVec) -> HhView {
    let mut bucket_fixed: Vec<Vec<i128>> =
        vec![vec![0i128; params.buckets as usize]; params.reps as usize];
    for rep in 0..params.reps {
        for &(k, sign) in x {
            let b = params.bucket_of(rep, k);
            let stream = GaussianStream::new(gauss_seed, params.bucket_row_label(rep, b));
            bucket_fixed[rep as usize][b as usize] += sign as i128 * quantize(stream.value(k));
        }
    }
    let norm_seed = derive_seed(gauss_seed, "hh-norm", 0);
    HhView {
        params: params.clone(),
        bucket_values: bucket_fixed
            .into_iter()
            .map(|row| row.into_iter().map(crate::rng::dequantize).collect())
            .collect(),
        norm_values: l2_sketch(x, params.norm_rows, norm_seed),
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k == 0 {
        return 0.0;
    }
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Returns every index whose estimated squared value reaches the acceptance
/// threshold: all phi-heavy elements with high probability, and nothing far
/// below the threshold. Per-element estimates are medians over repetitions
/// of the squared bucket value, corrected by the chi-squared median.
pub fn hh_decode(view: &HhView) -> Vec<u64> {
    let params = &view.params;
    let norm_sq = l2_estimate(&view.norm_values);
    let threshold = HH_ACCEPT * params.phi * norm_sq;
    let mut out = Vec::new();
    for i in 0..params.universe {
        let samples: Vec<f64> = (0..params.reps)
            .map(|rep| {
                let v = view.bucket_values[rep as usize][params.bucket_of(rep, i) as usize];
                v * v
            })
            .collect();
        let est = median(samples) / CHI2_MEDIAN;
        if est >= threshold {
            out.push(i);
        }
    }
    out
}

/// Outcome of sketched spanning-forest recovery.
#[derive(Debug, Clone, Serialize)]
pub struct ForestResult {
    pub forest: Vec<(u32, u32)>,
    /// True when the forest has the same components as the input graph.
    pub spanning: bool,
    /// Queries that failed although the component had outgoing edges.
    pub l0_failures: usize,
    pub rounds: usize,
    pub rows_per_round: u64,
}

/// Signed cut vector of a vertex set over the pair universe: +1 when the
/// smaller endpoint is inside.
fn cut_vector(g: &Graph, in_side: &[bool]) -> SignedVec {
    let mut x = Vec::new();
    for &(u, v) in g.edges() {
        let (iu, iv) = (in_side[u as usize], in_side[v as usize]);
        if iu != iv {
            x.push((pair_index(u, v, g.n()), if iu { 1 } else { -1 }));
        }
    }
    x
}

/// Recovers a spanning forest from ceil(log2 n) independent l0-sketch
/// batches, one consumed per growing round: every component samples an
/// outgoing edge from its cut vector and merges. Adaptive reuse would break
/// the samplers' independence, so each round gets fresh sketches. The output
/// is a forest no matter what the sketches return (a union-find guard drops
/// cycle-closing candidates); it spans whenever no needed query failed.
pub fn spanning_forest(g: &Graph, delta: f64, seed: u64) -> ForestResult {
    let n = g.n();
    let rounds_budget = if n <= 1 {
        0
    } else {
        (n as f64).log2().ceil() as usize
    };
    let params_of = |round: usize| {
        L0Params::new(
            pair_count(n).max(1),
            delta,
            derive_seed(seed, "forest-sample", round as u64),
        )
    };
    let rows_per_round = if rounds_budget > 0 {
        params_of(0).row_count()
    } else {
        0
    };
    let mut uf = UnionFind::new(n);
    let mut forest: Vec<(u32, u32)> = Vec::new();
    let mut l0_failures = 0usize;
    let mut rounds = 0usize;
    for round in 0..rounds_budget {
        if uf.component_count() <= 1 {
            break;
        }
        let labels = uf.labels();
        let component_count = uf.component_count();
        rounds += 1;
        let params = params_of(round);
        let gauss_seed = derive_seed(seed, "forest-gauss", round as u64);
        let mut candidates: Vec<(u32, u32)> = Vec::new();
        let mut failed_this_round = false;
        for comp in 0..component_count {
            let in_side: Vec<bool> = (0..n).map(|v| labels[v] == comp).collect();
            let x = cut_vector(g, &in_side);
            match l0_query(&params, gauss_seed, &x) {
                L0Outcome::Index(pair) => {
                    let (u, v) = pair_unindex(pair, n);
                    candidates.push((u, v));
                }
                L0Outcome::Fail => {
                    if !x.is_empty() {
                        l0_failures += 1;
                        failed_this_round = true;
                    }
                }
            }
        }
        let mut progress = false;
        for (u, v) in candidates {
            if g.has_edge(u, v) && uf.union(u, v) {
                forest.push((u.min(v), u.max(v)));
                progress = true;
            }
        }
        // No merges and no failures: remaining components are mutually
        // disconnected and later rounds cannot change that.
        if !progress && !failed_this_round {
            break;
        }
    }
    forest.sort_unstable();
    let spanning = {
        let forest_graph = Graph::new(n, forest.iter().copied()).unwrap();
        forest_graph.components() == g.components()
    };
    ForestResult {
        forest,
        spanning,
        l0_failures,
        rounds,
        rows_per_round,
    }
}
