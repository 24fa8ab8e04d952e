//! Seed derivation.
//!
//! Every random stream in the crate is keyed by a 64-bit seed mixed with
//! small integer coordinates (node, walker, iteration) or a text label.
//! Streams never depend on execution order.

use serde::{Deserialize, Deserializer, Serializer};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the stream at coordinates `(a, b)` under `seed`.
#[inline]
pub fn stream_seed(seed: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ a.wrapping_mul(GOLDEN)) ^ b)
}

/// Seed for a named component under a master seed. Adding a new label never
/// changes the seeds of existing ones.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    // FNV-1a over the label bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    stream_seed(master, h, 0x5eed)
}

/// Serde adapter for `u64` seeds in TOML, whose integers are signed 64-bit.
/// Values above `i64::MAX` are written as decimal strings.
pub mod serde_seed {
    use super::*;

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*v) {
            Ok(i) => s.serialize_i64(i),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(i) => u64::try_from(i).map_err(serde::de::Error::custom),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
