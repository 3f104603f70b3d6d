//! Named random substreams.
//!
//! Every stochastic process draws from its own ChaCha stream keyed by
//! `(seed, process, index)`, so switching one process on or off never shifts
//! the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Mobility,
    Fading,
    Shadowing,
    Traffic,
    Intent,
    Harq,
}

impl Stream {
    fn key(self) -> u64 {
        match self {
            Stream::Mobility => 0x6d6f_6269,
            Stream::Fading => 0x6661_6465,
            Stream::Shadowing => 0x7368_6164,
            Stream::Traffic => 0x7472_6166,
            Stream::Intent => 0x696e_7465,
            Stream::Harq => 0x6861_7271,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Substream for `stream`, further split by `index` (usually a UE id).
    pub fn substream(&self, stream: Stream, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = splitmix64(self.seed);
        for (i, word) in [self.seed, stream.key(), index, 0x5eed].into_iter().enumerate() {
            state = splitmix64(state ^ word);
            key[i * 8..(i + 1) * 8].copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}
