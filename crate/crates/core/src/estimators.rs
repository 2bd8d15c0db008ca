//! Per-draw values of the compared estimators of `p_b = P(S_n > b)`.
//!
//! Every function returns one unbiased draw; averaging `N` of them gives the
//! estimate. Tail ratios are formed in log space.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::dist::{hazard_twist, sample, TailModel};
use crate::error::{check_param, Error, Result};
use crate::policy::MixturePolicy;
use crate::walk::simulate_is_outcome;

/// Which `n-1` order statistics the Asmussen–Binswanger estimator sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum AbSum {
    /// The `n-1` smallest, leaving out the maximum.
    #[default]
    Smallest,
    /// The `n-1` largest.
    Largest,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    StandardMc,
    AsmussenBinswanger(AbSum),
    AsmussenKroese,
    HazardTwist { theta: f64 },
    MixtureIs(MixturePolicy),
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::StandardMc => "mc",
            EstimatorKind::AsmussenBinswanger(_) => "ab",
            EstimatorKind::AsmussenKroese => "ak",
            EstimatorKind::HazardTwist { .. } => "hazard",
            EstimatorKind::MixtureIs(p) => p.kind().name(),
        }
    }
}

/// An estimator bound to a model, walk length and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec<M> {
    kind: EstimatorKind,
    model: M,
    n: usize,
    b: f64,
}

impl<M: TailModel> EstimatorSpec<M> {
    pub fn new(kind: EstimatorKind, model: M, n: usize, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::WalkLength { n, reason: "a walk needs at least one step" });
        }
        match &kind {
            EstimatorKind::HazardTwist { theta } => {
                check_param("theta", *theta, *theta > 0.0 && *theta < 1.0)?;
            }
            EstimatorKind::MixtureIs(p) if p.n() != n => {
                return Err(Error::WalkLength { n, reason: "policy was built for a different walk length" });
            }
            _ => {}
        }
        if b.is_nan() {
            return Err(Error::Parameter { name: "threshold", value: b });
        }
        Ok(Self { kind, model, n, b })
    }

    pub fn kind(&self) -> &EstimatorKind {
        &self.kind
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// One draw of the estimator.
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (m, n, b) = (&self.model, self.n, self.b);
        Ok(match &self.kind {
            EstimatorKind::StandardMc => mc_value(m, n, b, rng),
            EstimatorKind::AsmussenBinswanger(order) => ab_value_with(m, n, b, *order, rng),
            EstimatorKind::AsmussenKroese => ak_value(m, n, b, rng),
            EstimatorKind::HazardTwist { theta } => hazard_twist_value(m, n, b, *theta, rng)?,
            EstimatorKind::MixtureIs(policy) => mixture_is_value(policy, m, b, rng)?,
        })
    }
}

/// `I{S_n > b}` for a plain walk.
pub fn mc_value<M, R>(model: &M, n: usize, b: f64, rng: &mut R) -> f64
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    let s: f64 = (0..n).map(|_| sample(model, rng)).sum();
    if s > b {
        1.0
    } else {
        0.0
    }
}

/// Asmussen–Binswanger: `F̄(X_(n-1) ∨ (b - S_(n-1))) / F̄(X_(n-1))` where
/// `S_(n-1)` sums the `n-1` smallest draws.
pub fn ab_value<M, R>(model: &M, n: usize, b: f64, rng: &mut R) -> f64
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    ab_value_with(model, n, b, AbSum::Smallest, rng)
}

pub fn ab_value_with<M, R>(model: &M, n: usize, b: f64, order: AbSum, rng: &mut R) -> f64
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    if n == 1 {
        return model.tail(b);
    }
    let mut xs: Vec<f64> = (0..n).map(|_| sample(model, rng)).collect();
    xs.sort_unstable_by(f64::total_cmp);
    ab_from_sorted(model, b, &xs, order)
}

/// The Asmussen–Binswanger value for ascending `xs` (`len ≥ 2`).
pub fn ab_from_sorted<M: TailModel + ?Sized>(model: &M, b: f64, xs: &[f64], order: AbSum) -> f64 {
    let n = xs.len();
    let second = xs[n - 2];
    let s: f64 = match order {
        AbSum::Smallest => xs[..n - 1].iter().sum(),
        AbSum::Largest => xs[1..].iter().sum(),
    };
    libm::exp(model.ln_tail(second.max(b - s)) - model.ln_tail(second))
}

/// Asmussen–Kroese: `n F̄(M_{n-1} ∨ (b - S_{n-1}))` from `n-1` draws.
pub fn ak_value<M, R>(model: &M, n: usize, b: f64, rng: &mut R) -> f64
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    let mut max = f64::NEG_INFINITY;
    let mut s = 0.0;
    for _ in 1..n {
        let x = sample(model, rng);
        max = max.max(x);
        s += x;
    }
    ak_from_parts(model, n, b, max, s)
}

/// `n F̄(max ∨ (b - sum))` for the first `n-1` draws summarised as `max`, `sum`.
pub fn ak_from_parts<M: TailModel + ?Sized>(model: &M, n: usize, b: f64, max: f64, sum: f64) -> f64 {
    n as f64 * model.tail(max.max(b - sum))
}

/// Plain walk under the hazard-rate twisted law, weighted by
/// `Π f(X_i) / f_θ(X_i)`.
pub fn hazard_twist_value<M, R>(model: &M, n: usize, b: f64, theta: f64, rng: &mut R) -> Result<f64>
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    let twisted = hazard_twist(model, theta)?;
    let mut s = 0.0;
    let mut lw = 0.0;
    for _ in 0..n {
        let x = sample(&twisted, rng);
        lw += model.ln_density(x) - twisted.ln_density(x);
        s += x;
    }
    Ok(if s > b { libm::exp(lw) } else { 0.0 })
}

/// `exp(log_weight) · I{S_n > b}` for one mixture-sampler trajectory.
pub fn mixture_is_value<M, R>(policy: &MixturePolicy, model: &M, b: f64, rng: &mut R) -> Result<f64>
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    Ok(simulate_is_outcome(policy, model, b, rng)?.value())
}
