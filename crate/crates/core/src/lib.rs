//! Importance sampling for tail probabilities `P(S_n > b)` of random walks
//! with regularly varying increments.
//!
//! The crate is `no_std` (with `alloc`). All randomness enters through a
//! caller-supplied [`rand_core::RngCore`], so every routine is a pure
//! function of its arguments and the stream it is handed.
//!
//! Layout:
//!
//! * [`dist`]: heavy-tailed laws (density, tail, quantile) and exact samplers.
//! * [`policy`]: the large-jump densities and mixing weights of the dynamic
//!   mixture sampler.
//! * [`walk`]: one trajectory under the sampling measure with its log
//!   likelihood ratio.
//! * [`estimators`]: per-draw values of the compared estimators.
//! * [`stats`]: streaming, mergeable aggregation of per-draw values.
//! * [`analysis`]: asymptotic second-moment bounds and the `λ` optimizer.
//! * [`oracle`]: quadrature ground truth for short walks.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod dist;
mod error;
pub mod estimators;
pub mod optimize;
pub mod oracle;
pub mod policy;
pub mod quad;
pub mod stats;
pub mod uniform;
pub mod walk;

pub use error::{Error, Result};
