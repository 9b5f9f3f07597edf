//! Counter-based random streams.
//!
//! Every randomized routine derives its generator from a master seed plus a
//! tuple of stream coordinates (trial index, codeword index, ...), so results
//! never depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains keep independent consumers of one seed apart.
pub mod domain {
    pub const CODEBOOK: u64 = 1;
    pub const ERROR_TRIAL: u64 = 2;
    pub const PHASE1_TRIAL: u64 = 3;
    pub const PHASE2_TRIAL: u64 = 4;
    pub const STATE_DRAW: u64 = 5;
    pub const CONCENTRATION: u64 = 6;
    pub const NET_SAMPLE: u64 = 7;
    pub const NET_COVERAGE: u64 = 8;
    pub const PROBE: u64 = 9;
    pub const RESTART: u64 = 10;
    pub const FIXTURE: u64 = 11;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for the stream addressed by `coords` under `seed`.
pub fn stream(seed: u64, coords: &[u64]) -> StreamRng {
    let mut key = splitmix(seed);
    let mut words = [0u8; 32];
    for (i, c) in coords.iter().enumerate() {
        key = splitmix(key ^ splitmix(c.wrapping_add(i as u64 + 1)));
    }
    for (i, chunk) in words.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix(key.wrapping_add(i as u64)).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(words);
    rng.set_stream(coords.first().copied().unwrap_or(0));
    rng
}
