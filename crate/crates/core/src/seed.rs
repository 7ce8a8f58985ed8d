//! Seed derivation. Every random stream in a run is keyed off the run seed
//! plus a short tuple naming its purpose, so that streams never alias.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix(base);
    for &p in parts {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Purpose tags used as the first element of a derivation tuple.
pub(crate) const ACQUISITION: u64 = 1;
pub(crate) const POLICY: u64 = 2;
pub(crate) const REWARD: u64 = 3;
pub(crate) const EVAL_CV: u64 = 4;
pub(crate) const EVAL_TEST: u64 = 5;
pub(crate) const PRECOLLECT: u64 = 6;
pub(crate) const BEST_SUBSET: u64 = 7;
