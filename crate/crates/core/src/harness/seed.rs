use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index` under `master_seed`:
/// `splitmix64(splitmix64(master_seed) ^ run_index · GOLDEN_GAMMA)`.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ run_index.wrapping_mul(GOLDEN_GAMMA))
}

/// Independent generator for one run of an ensemble.
pub fn run_rng(master_seed: u64, run_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(run_seed(master_seed, run_index))
}
