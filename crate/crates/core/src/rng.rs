//! Deterministic per-trial random streams.
//!
//! Every (sweep point, trial) pair gets its own ChaCha8 stream derived from the run seed:
//! the key is `seed_from_u64(seed)` and the stream id is `(point << 32) | trial`. Trials
//! can therefore run in any order or in parallel and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, point: u32, trial: u32) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}
