//! Seeded `G(n,p)` sampling and per-trial seed derivation.
//!
//! Generator: ChaCha8 (`rand_chacha`), keyed with four consecutive SplitMix64
//! outputs of the 64-bit seed written little-endian, stream 0. Pairs `(u, v)`
//! with `u < v` are visited in lexicographic order and each consumes exactly one
//! `u64` draw `x`; the edge is present iff `x < floor(p * 2^64)`. Any
//! implementation following these three rules reproduces the same graphs.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::Result;
use crate::graph::{check_vertex_count, Graph};
use crate::probability::Probability;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GnpParams {
    pub n: usize,
    pub p: Probability,
    pub seed: u64,
}

impl GnpParams {
    pub fn new(n: usize, p: Probability, seed: u64) -> Self {
        Self { n, p, seed }
    }
}

/// One SplitMix64 step: advances `state` and returns the mixed output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The ChaCha8 stream used for a given seed.
pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Samples `G(n,p)`; identical parameters give identical graphs.
pub fn sample_gnp(params: &GnpParams) -> Result<Graph> {
    check_vertex_count(params.n)?;
    let mut g = Graph::empty(params.n)?;
    let threshold = params.p.threshold_u64();
    let mut rng = rng_for_seed(params.seed);
    for u in 0..params.n {
        for v in u + 1..params.n {
            if rng.next_u64() < threshold {
                g.link(u, v);
            }
        }
    }
    Ok(g)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seed of one Monte Carlo trial.
///
/// FNV-1a (64-bit) over the bytes `base_seed (u64 LE) ‖ n (u64 LE) ‖ p text
/// (UTF-8, canonical form) ‖ 0xFF ‖ trial (u64 LE)`, followed by one SplitMix64
/// step seeded with the hash.
pub fn trial_seed(base_seed: u64, n: usize, p: &Probability, trial: u64) -> u64 {
    let mut h = FNV_OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    feed(&base_seed.to_le_bytes());
    feed(&(n as u64).to_le_bytes());
    feed(p.as_str().as_bytes());
    feed(&[0xff]);
    feed(&trial.to_le_bytes());
    let mut state = h;
    splitmix64(&mut state)
}
