use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used throughout the crate. ChaCha keeps streams identical
/// across platforms for a given seed.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with stream coordinates into an independent sub-seed
/// (splitmix64 finalizer applied per coordinate).
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    let mut h = seed;
    for &c in coords {
        h = splitmix(h ^ splitmix(c.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
