//! Replica streams.
//!
//! Every replica draws from its own ChaCha8 stream keyed by
//! `(master_seed, replica)`. Streams never overlap, so results do not depend
//! on how replicas are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master seed used when none is configured.
pub const DEFAULT_MASTER_SEED: u64 = 0x5EED_2020_0217;

/// Stream offset for auxiliary draws (burn-in, calibration) so they never
/// collide with the replica streams `0..2^63`.
const AUX_STREAM_BIT: u64 = 1 << 63;

pub type StreamRng = ChaCha8Rng;

/// Generator for replica `replica` under `master_seed`.
pub fn replica_rng(master_seed: u64, replica: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica & !AUX_STREAM_BIT);
    rng
}

/// Generator for auxiliary work tied to `replica` (e.g. α_T burn-in).
pub fn aux_rng(master_seed: u64, replica: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica | AUX_STREAM_BIT);
    rng
}
