//! Stream derivation.
//!
//! Every random stream in an episode is keyed by a tuple of stable
//! identifiers (episode seed, agent id, iteration, ...) and never by
//! scheduling order, so results do not depend on thread count or on the
//! order agents appear in a roster.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used everywhere in the simulator. ChaCha8 output is
/// specified bit-for-bit, so digests are portable across platforms.
pub type Stream = ChaCha8Rng;

pub(crate) const TAG_ENV: u64 = 0x454e_5649;
pub(crate) const TAG_SPAWN: u64 = 0x5350_574e;
pub(crate) const TAG_AGENT: u64 = 0x4147_4e54;
pub(crate) const TAG_EPISODE: u64 = 0x4550_4953;
pub(crate) const TAG_PATTERN_GOOD: u64 = 0x474f_4f44;
pub(crate) const TAG_PATTERN_EVIL: u64 = 0x4556_494c;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `seed`, producing a well-mixed 64-bit key.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(seed: u64, parts: &[u64]) -> Stream {
    Stream::seed_from_u64(derive(seed, parts))
}

/// Seed of episode `index` under `master`.
pub fn episode_seed(master: u64, index: u64) -> u64 {
    derive(master, &[TAG_EPISODE, index])
}

/// Decision stream of one agent in one iteration.
pub fn agent_stream(episode_seed: u64, agent_id: u32, iteration: u32) -> Stream {
    stream(episode_seed, &[TAG_AGENT, u64::from(agent_id), u64::from(iteration)])
}
