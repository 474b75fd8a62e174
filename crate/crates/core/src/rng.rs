use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `seed`. Distinct `stream`s of the same seed
/// are independent, so one user-facing seed can drive several stages.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
