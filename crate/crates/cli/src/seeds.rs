//! Counter-based random streams.
//!
//! Every (estimator, n, b, repetition) task gets its own ChaCha8 stream. The
//! key is derived from the root seed, the 64-bit stream id from a hash of the
//! cell, and the repetition selects a block of `2^40` words inside that
//! stream. A task's draws therefore depend only on the root seed and its own
//! coordinates, never on scheduling or on which other cells are configured.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

const REP_SHIFT: u32 = 40;

/// FNV-1a, stable across platforms and toolchains.
fn fnv1a(bytes: impl IntoIterator<Item = u8>, mut h: u64) -> u64 {
    for byte in bytes {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream id of a cell. `b` is keyed by its bit pattern.
pub fn cell_id(label: &str, n: usize, b: f64) -> u64 {
    let h = fnv1a(label.bytes(), 0xcbf2_9ce4_8422_2325);
    let h = fnv1a([0xff], h);
    let h = fnv1a((n as u64).to_le_bytes(), h);
    fnv1a(b.to_bits().to_le_bytes(), h)
}

pub fn substream(root: u64, cell: u64, repetition: u64) -> ChaCha8Rng {
    assert!(repetition < 1 << (68 - REP_SHIFT), "repetition index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(cell);
    rng.set_word_pos(u128::from(repetition) << REP_SHIFT);
    rng
}
