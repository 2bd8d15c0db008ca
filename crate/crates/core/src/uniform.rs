//! Uniform variates on the open unit interval.

use rand_core::RngCore;

const SCALE: f64 = 1.0 / (1u64 << 52) as f64;

/// Draws `U` uniform on `(0, 1)`: the 52-bit grid shifted by half a step,
/// so neither endpoint is ever produced and `1 - U` is exact for `U > 1/2`.
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * SCALE
}
