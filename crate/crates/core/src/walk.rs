//! Trajectories of `S_n = X_1 + ... + X_n` under the dynamic mixture
//! sampler, with the log likelihood ratio `log dμ_n/dν_n^b` accumulated
//! along the way.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::dist::{sample, TailModel};
use crate::error::Result;
use crate::policy::MixturePolicy;
use crate::uniform::open_unit;

/// A full trajectory. `partial_sums[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    pub increments: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub log_weight: f64,
    pub hit: bool,
}

impl WalkPath {
    /// `exp(log_weight) · I{S_n > b}`.
    pub fn value(&self) -> f64 {
        outcome_value(self.log_weight, self.hit)
    }

    pub fn sum(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

/// The scalar part of a trajectory, for hot loops that do not keep paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub sum: f64,
    pub log_weight: f64,
    pub hit: bool,
}

impl PathOutcome {
    pub fn value(&self) -> f64 {
        outcome_value(self.log_weight, self.hit)
    }
}

fn outcome_value(log_weight: f64, hit: bool) -> f64 {
    if hit {
        libm::exp(log_weight)
    } else {
        0.0
    }
}

/// Runs the sampler and hands each increment to `record`.
fn drive<M, R, F>(policy: &MixturePolicy, model: &M, b: f64, rng: &mut R, mut record: F) -> Result<PathOutcome>
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
    F: FnMut(f64),
{
    let n = policy.n();
    let mut s = 0.0;
    let mut log_weight = 0.0;
    for i in 1..=n {
        let x = if s > b {
            sample(model, rng)
        } else {
            let x = if i < n && open_unit(rng) < policy.p(i) {
                sample(model, rng)
            } else {
                policy.g_sample(i, s, b, model, rng)?
            };
            log_weight += model.ln_density(x) - policy.step_ln_density(i, s, b, model, x);
            x
        };
        record(x);
        s += x;
    }
    Ok(PathOutcome { sum: s, log_weight, hit: s > b })
}

/// One trajectory under the mixture sampler of `policy`.
pub fn simulate_is_path<M, R>(policy: &MixturePolicy, model: &M, b: f64, rng: &mut R) -> Result<WalkPath>
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    let mut increments = Vec::with_capacity(policy.n());
    let out = drive(policy, model, b, rng, |x| increments.push(x))?;
    Ok(WalkPath { partial_sums: partial_sums(&increments), increments, log_weight: out.log_weight, hit: out.hit })
}

/// As [`simulate_is_path`] without storing the increments.
pub fn simulate_is_outcome<M, R>(policy: &MixturePolicy, model: &M, b: f64, rng: &mut R) -> Result<PathOutcome>
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    drive(policy, model, b, rng, |_| {})
}

/// `n` i.i.d. increments from the model; the weight is identically 1.
/// `hit` is evaluated against `b`.
pub fn simulate_plain_path<M, R>(model: &M, n: usize, b: f64, rng: &mut R) -> WalkPath
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    let increments: Vec<f64> = (0..n).map(|_| sample(model, rng)).collect();
    let partial_sums = partial_sums(&increments);
    let hit = partial_sums[n] > b;
    WalkPath { increments, partial_sums, log_weight: 0.0, hit }
}

/// `exp(log_weight - log F̄(b))`: the likelihood ratio on the scale of a
/// single large jump. Reported for every path; only hitting paths are
/// covered by the boundedness property.
pub fn normalized_weight<M: TailModel + ?Sized>(path: &WalkPath, model: &M, b: f64) -> f64 {
    libm::exp(path.log_weight - model.ln_tail(b))
}

fn partial_sums(increments: &[f64]) -> Vec<f64> {
    let mut sums = Vec::with_capacity(increments.len() + 1);
    let mut s = 0.0;
    sums.push(s);
    for &x in increments {
        s += x;
        sums.push(s);
    }
    sums
}
