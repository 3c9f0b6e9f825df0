//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by a 64-bit
//! master seed. Independent work items (replications, ε-grid points) select
//! disjoint ChaCha streams by index, so results do not depend on how work is
//! scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` under `master_seed`.
pub fn substream(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for replication `rep` at grid point `point`.
pub fn replication_stream(point: u32, rep: u32) -> u64 {
    (u64::from(point) << 32) | u64::from(rep)
}

#[inline]
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
