//! Seeded random streams. Every estimator derives one independent stream per
//! trial index, so a run with `k` trials sees exactly the first `k` samples of
//! a run with more trials under the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::seq::SeqVector;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Dense standard-normal vector at indices `start..start + len`.
pub fn gaussian_seq<R: Rng + ?Sized>(rng: &mut R, start: usize, len: usize) -> SeqVector {
    SeqVector::from_dense_at(start, &gaussian_vec(rng, len))
}
