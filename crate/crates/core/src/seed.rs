//! Seed expansion for sweeps.
//!
//! Run `k` of a sweep with master seed `s` uses `splitmix64(s + (k + 1) * GOLDEN) >> 1`,
//! so a run's seed depends only on its index, never on scheduling order. The top
//! bit is dropped so every seed fits a TOML integer and can be pasted back into a
//! config.

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer of the splitmix64 generator.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sub_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN))) >> 1
}
