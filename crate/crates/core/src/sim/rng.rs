use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Generator behind every stochastic draw: ChaCha with 8 rounds, a
/// counter-based stream cipher, keyed by `base_seed` and stream `rollout_index`.
pub const ALGORITHM_ID: &str = "chacha8";

/// Identifies the random stream of one rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedInfo {
    pub base_seed: u64,
    pub rollout_index: u64,
}

impl SeedInfo {
    /// The protocol seed `s` maps to key `s`, engine stream 0.
    pub fn from_seed(seed: u64) -> Self {
        SeedInfo {
            base_seed: seed,
            rollout_index: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    ChaCha(Box<ChaCha8Rng>),
    Scripted(VecDeque<f64>),
}

/// Uniform draws in `[0, 1)` with an auditable draw counter.
#[derive(Debug, Clone)]
pub struct RngStream {
    source: Source,
    pub base_seed: u64,
    pub rollout_index: u64,
    pub draw_counter: u64,
}

impl RngStream {
    pub fn new(base_seed: u64, rollout_index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&base_seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(rollout_index);
        RngStream {
            source: Source::ChaCha(Box::new(rng)),
            base_seed,
            rollout_index,
            draw_counter: 0,
        }
    }

    pub fn from_seed_info(seed: SeedInfo) -> Self {
        Self::new(seed.base_seed, seed.rollout_index)
    }

    /// A stream replaying fixed values, for tests that need a specific roll.
    /// Panics when exhausted.
    pub fn scripted(values: impl IntoIterator<Item = f64>) -> Self {
        RngStream {
            source: Source::Scripted(values.into_iter().collect()),
            base_seed: 0,
            rollout_index: 0,
            draw_counter: 0,
        }
    }

    pub fn algorithm_id(&self) -> &'static str {
        match self.source {
            Source::ChaCha(_) => ALGORITHM_ID,
            Source::Scripted(_) => "scripted",
        }
    }

    /// Next uniform in `[0, 1)`: the top 53 bits of a 64-bit word, scaled.
    pub fn uniform(&mut self) -> f64 {
        self.draw_counter += 1;
        match &mut self.source {
            Source::ChaCha(rng) => (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64),
            Source::Scripted(q) => q.pop_front().expect("scripted rng exhausted"),
        }
    }
}
