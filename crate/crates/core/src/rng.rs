//! Counter-based deterministic randomness.
//!
//! Every random quantity in this crate is a pure function of a 64-bit seed
//! and a few integer labels. Uniform values come from a keyed bijective
//! mixer applied to a counter, which gives random access: the Gaussian value
//! attached to pair index `e` of row `r` can be evaluated in isolation,
//! which is what sketch updates and huge implicit sampling matrices need.
//! Sequential generators cannot seek, so none are used.

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// FNV-1a over the label bytes; used to derive independent sub-streams from
/// one experiment seed.
pub fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

/// Derives a child seed from `(seed, label, index)`. All experiment
/// parallelism draws per-trial seeds through this, so aggregation order
/// never affects the random values themselves.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    mix64(
        mix64(seed ^ hash_label(label))
            .wrapping_add(mix64(index.wrapping_mul(GOLDEN) ^ 0x2545_f491_4f6c_dd1d)),
    )
}

/// Keyed uniform `u64` at a counter position. For a fixed key the map
/// `counter -> value` is a bijection.
#[inline]
pub fn keyed_uniform(key1: u64, key2: u64, counter: u64) -> u64 {
    mix64(mix64(counter ^ key1).wrapping_add(key2))
}

#[inline]
fn to_unit_interval(bits: u64) -> f64 {
    // (0, 1]: Box-Muller takes a logarithm of this.
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unbiased-enough bounded uniform (Lemire reduction); bias is O(bound/2^64).
#[inline]
pub fn bounded(value: u64, bound: u64) -> u64 {
    ((value as u128 * bound as u128) >> 64) as u64
}

/// A deterministic stream of independent standard normals indexed by pair
/// index. Distinct `row_label`s give independent streams; the decoder side
/// of a sketch never sees the seed this was built from.
#[derive(Debug, Clone, Copy)]
pub struct GaussianStream {
    key1: u64,
    key2: u64,
}

impl GaussianStream {
    pub fn new(master_seed: u64, row_label: u64) -> Self {
        let key1 = mix64(master_seed ^ mix64(row_label ^ GOLDEN));
        let key2 = mix64(key1 ^ 0xd1b5_4a32_d192_ed03);
        GaussianStream { key1, key2 }
    }

    /// Standard normal at pair index `e`, via Box-Muller on the consecutive
    /// counter pair (2e, 2e+1).
    #[inline]
    pub fn value(&self, pair: u64) -> f64 {
        let u1 = to_unit_interval(keyed_uniform(self.key1, self.key2, 2 * pair));
        let u2 = to_unit_interval(keyed_uniform(self.key1, self.key2, 2 * pair + 1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Fixed-point scale for projection coordinates. Gaussian contributions are
/// quantized to multiples of 2^-80 and accumulated in i128, which makes
/// projection sums exact: linearity, insert/delete round trips, and interior
/// edge cancellation in column combines all hold bitwise, not just to
/// rounding error. Headroom: |g| < 2^4, counts < 2^22, so sums stay far
/// below i128 range.
pub const FP_SCALE_BITS: u32 = 80;

const FP_SCALE: f64 = (1u128 << FP_SCALE_BITS) as f64;

#[inline]
pub fn quantize(x: f64) -> i128 {
    (x * FP_SCALE).round() as i128
}

#[inline]
pub fn dequantize(v: i128) -> f64 {
    v as f64 / FP_SCALE
}
