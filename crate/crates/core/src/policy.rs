//! Large-jump densities `g_i(· | s)` and mixing weights for the dynamic
//! mixture sampler.
//!
//! Below the threshold, step `i < n` draws from `p_i f + q_i g_i(·|s)` and the
//! last step draws from `g_n(·|s)` alone. Steps are indexed from 1.
//!
//! Four families are provided:
//!
//! * `Conditional`: `f` conditioned above `a(b-s)`, last step above `b-s`.
//! * `Gpd`: generalized Pareto tail above `a(b-s)`; last step GPD above `b-s`
//!   while `s ≤ b - b(1-a)^(n-1)`, plain `f` otherwise.
//! * `ScalingI`: a draw `X'` from `f` scaled to `λbX'` when positive.
//! * `ScalingII`: as `ScalingI` for `X' ≤ u`, and `λb X'^(1+δ)` above `u`.
//!
//! Both scaling families use the same last-step gate as `Gpd`, so `a` is a
//! parameter of every family. Scaling families assume `f > 0` on `(0, ∞)`
//! with `inf L > 0`; this is not checked.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::dist::{gpd_ln_density, sample, sample_conditional_above, sample_gpd_tail, TailModel};
use crate::error::{check_param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "family", rename_all = "snake_case")
)]
pub enum PolicyKind {
    Conditional { a: f64 },
    Gpd { a: f64 },
    ScalingI { lambda: f64, a: f64 },
    ScalingII { lambda: f64, u: f64, delta: f64, a: f64 },
}

impl PolicyKind {
    pub fn a(&self) -> f64 {
        match *self {
            PolicyKind::Conditional { a }
            | PolicyKind::Gpd { a }
            | PolicyKind::ScalingI { a, .. }
            | PolicyKind::ScalingII { a, .. } => a,
        }
    }

    /// Same family and shape parameters with a different `a`.
    pub fn with_a(self, a: f64) -> Self {
        match self {
            PolicyKind::Conditional { .. } => PolicyKind::Conditional { a },
            PolicyKind::Gpd { .. } => PolicyKind::Gpd { a },
            PolicyKind::ScalingI { lambda, .. } => PolicyKind::ScalingI { lambda, a },
            PolicyKind::ScalingII { lambda, u, delta, .. } => PolicyKind::ScalingII { lambda, u, delta, a },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Conditional { .. } => "conditional",
            PolicyKind::Gpd { .. } => "gpd",
            PolicyKind::ScalingI { .. } => "scaling_i",
            PolicyKind::ScalingII { .. } => "scaling_ii",
        }
    }

    pub fn is_scaling(&self) -> bool {
        matches!(self, PolicyKind::ScalingI { .. } | PolicyKind::ScalingII { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.a();
        check_param("a", a, a > 0.0 && a < 1.0)?;
        match *self {
            PolicyKind::ScalingI { lambda, .. } => {
                check_param("lambda", lambda, lambda > 0.0 && lambda.is_finite())?;
            }
            PolicyKind::ScalingII { lambda, u, delta, .. } => {
                check_param("lambda", lambda, lambda > 0.0 && lambda.is_finite())?;
                check_param("u", u, u > 0.0 && u < 1.0)?;
                check_param("delta", delta, delta > 0.0 && delta.is_finite())?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// Probability `p` of a plain draw and `q = 1 - p` of a large-jump draw.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixWeight {
    pub p: f64,
    pub q: f64,
}

impl MixWeight {
    pub fn from_p(p: f64) -> Self {
        Self { p, q: 1.0 - p }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixturePolicy {
    kind: PolicyKind,
    weights: Vec<MixWeight>,
    n: usize,
}

impl MixturePolicy {
    /// `weights` holds `(p_i, q_i)` for `i = 1..n-1`.
    pub fn new(kind: PolicyKind, weights: Vec<MixWeight>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::WalkLength { n, reason: "a walk needs at least one step" });
        }
        kind.validate()?;
        if weights.len() != n - 1 {
            return Err(Error::WeightCount { expected: n - 1, got: weights.len() });
        }
        for w in &weights {
            check_param("p", w.p, w.p > 0.0 && w.p < 1.0)?;
            check_param("q", w.q, (w.p + w.q - 1.0).abs() < 1e-12)?;
        }
        Ok(Self { kind, weights, n })
    }

    /// The policy with the weights that minimise its asymptotic second-moment
    /// bound.
    pub fn with_optimal_weights(kind: PolicyKind, n: usize, alpha: f64) -> Result<Self> {
        kind.validate()?;
        Self::new(kind, optimal_mix_weights(&kind, n, alpha), n)
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[MixWeight] {
        &self.weights
    }

    /// `p_i` for `1 ≤ i ≤ n-1`.
    pub fn p(&self, i: usize) -> f64 {
        self.weights[i - 1].p
    }

    pub fn q(&self, i: usize) -> f64 {
        self.weights[i - 1].q
    }

    /// Whether the last step still uses its large-jump density at `s`:
    /// `s ≤ b - b(1-a)^(n-1)`.
    pub fn last_step_gate(&self, s: f64, b: f64) -> bool {
        let a = self.kind.a();
        s <= b - b * libm::pow(1.0 - a, (self.n - 1) as f64)
    }

    /// A draw from `g_i(· | s)`; requires `s ≤ b`.
    pub fn g_sample<M, R>(&self, i: usize, s: f64, b: f64, model: &M, rng: &mut R) -> Result<f64>
    where
        M: TailModel + ?Sized,
        R: RngCore + ?Sized,
    {
        debug_assert!(i >= 1 && i <= self.n);
        debug_assert!(s <= b);
        let last = i == self.n;
        match self.kind {
            PolicyKind::Conditional { a } => {
                let c = if last { b - s } else { a * (b - s) };
                sample_conditional_above(model, c, rng)
            }
            PolicyKind::Gpd { a } => {
                if !last {
                    sample_gpd_tail(model.alpha(), a * (b - s), rng)
                } else if self.last_step_gate(s, b) {
                    sample_gpd_tail(model.alpha(), b - s, rng)
                } else {
                    Ok(sample(model, rng))
                }
            }
            PolicyKind::ScalingI { lambda, .. } => {
                check_param("threshold", b, b > 0.0)?;
                if last && !self.last_step_gate(s, b) {
                    return Ok(sample(model, rng));
                }
                let x = sample(model, rng);
                Ok(if x > 0.0 { lambda * b * x } else { x })
            }
            PolicyKind::ScalingII { lambda, u, delta, .. } => {
                check_param("threshold", b, b > 0.0)?;
                if last && !self.last_step_gate(s, b) {
                    return Ok(sample(model, rng));
                }
                let x = sample(model, rng);
                Ok(scaling_ii_map(x, lambda * b, u, delta))
            }
        }
    }

    /// `log g_i(x | s)`; `-∞` outside its support. Requires `s ≤ b`.
    pub fn g_ln_density<M: TailModel + ?Sized>(&self, i: usize, s: f64, b: f64, model: &M, x: f64) -> f64 {
        let last = i == self.n;
        match self.kind {
            PolicyKind::Conditional { a } => {
                let c = if last { b - s } else { a * (b - s) };
                if c <= model.support_lower() {
                    model.ln_density(x)
                } else if x > c {
                    model.ln_density(x) - model.ln_tail(c)
                } else {
                    f64::NEG_INFINITY
                }
            }
            PolicyKind::Gpd { a } => {
                if !last {
                    gpd_ln_density(model.alpha(), a * (b - s), x)
                } else if self.last_step_gate(s, b) {
                    gpd_ln_density(model.alpha(), b - s, x)
                } else {
                    model.ln_density(x)
                }
            }
            PolicyKind::ScalingI { lambda, .. } => {
                if (last && !self.last_step_gate(s, b)) || x <= 0.0 {
                    return model.ln_density(x);
                }
                let scale = lambda * b;
                model.ln_density(x / scale) - libm::log(scale)
            }
            PolicyKind::ScalingII { lambda, u, delta, .. } => {
                if (last && !self.last_step_gate(s, b)) || x <= 0.0 {
                    return model.ln_density(x);
                }
                scaling_ii_ln_density(model, lambda * b, u, delta, x)
            }
        }
    }

    /// Log density of the full step-`i` sampling law at `x` given `S_{i-1} = s`:
    /// plain `f` above the threshold, the two-term mixture for `i < n`, and
    /// `g_n` on the last step.
    pub fn step_ln_density<M: TailModel + ?Sized>(&self, i: usize, s: f64, b: f64, model: &M, x: f64) -> f64 {
        if s > b {
            return model.ln_density(x);
        }
        if i == self.n {
            return self.g_ln_density(i, s, b, model, x);
        }
        let w = self.weights[i - 1];
        ln_add_exp(libm::log(w.p) + model.ln_density(x), libm::log(w.q) + self.g_ln_density(i, s, b, model, x))
    }
}

/// Candidate map of the second scaling sampler.
pub fn scaling_ii_map(x: f64, scale: f64, u: f64, delta: f64) -> f64 {
    if x <= 0.0 {
        x
    } else if x <= u {
        scale * x
    } else {
        scale * libm::pow(x, 1.0 + delta)
    }
}

// the two branch images overlap on [scale·u^(1+δ), scale·u]; densities add there
fn scaling_ii_ln_density<M: TailModel + ?Sized>(model: &M, scale: f64, u: f64, delta: f64, x: f64) -> f64 {
    let lin = if x <= scale * u { model.ln_density(x / scale) - libm::log(scale) } else { f64::NEG_INFINITY };
    let pow = if x >= scale * libm::pow(u, 1.0 + delta) {
        let r = 1.0 / (1.0 + delta);
        let ln_ratio = libm::log(x / scale);
        -libm::log(1.0 + delta) - libm::log(scale) + (r - 1.0) * ln_ratio + model.ln_density(libm::exp(r * ln_ratio))
    } else {
        f64::NEG_INFINITY
    };
    ln_add_exp(lin, pow)
}

/// `log(e^x + e^y)` without overflow; handles `-∞` in either argument.
pub fn ln_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Minimisers of the asymptotic bound: for the conditional and GPD families
/// `p_i = ((n-i-1)r + 1) / ((n-i)r + 1)` with `r = a^(-α/2)`; for the scaling
/// families `p_i = 1 - 1/(n-i+1)`, independent of `a` and `α`.
pub fn optimal_mix_weights(kind: &PolicyKind, n: usize, alpha: f64) -> Vec<MixWeight> {
    match kind {
        PolicyKind::Conditional { a } | PolicyKind::Gpd { a } => conditional_optimal_weights(n, alpha, *a),
        PolicyKind::ScalingI { .. } | PolicyKind::ScalingII { .. } => uniform_jump_weights(n),
    }
}

pub fn conditional_optimal_weights(n: usize, alpha: f64, a: f64) -> Vec<MixWeight> {
    let r = libm::pow(a, -0.5 * alpha);
    (1..n)
        .map(|i| {
            let k = (n - i) as f64;
            let p = ((k - 1.0) * r + 1.0) / (k * r + 1.0);
            MixWeight { p, q: r / (k * r + 1.0) }
        })
        .collect()
}

/// `p_i = (n-i)/(n-i+1)`: the large jump is equally likely to fall on any of
/// the remaining steps.
pub fn uniform_jump_weights(n: usize) -> Vec<MixWeight> {
    (1..n)
        .map(|i| {
            let k = (n - i) as f64;
            MixWeight { p: k / (k + 1.0), q: 1.0 / (k + 1.0) }
        })
        .collect()
}

/// Threshold-dependent `a_b = 1 - b^(-1/(2(n-1)) + δ)` for
/// `0 < δ < 1/(2(n-1))`, which drives the conditional mixture to
/// asymptotically optimal relative error.
pub fn optimality_schedule_a(b: f64, n: usize, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::WalkLength { n, reason: "the schedule needs n ≥ 2" });
    }
    let half_inv = 0.5 / (n - 1) as f64;
    check_param("delta", delta, delta > 0.0 && delta < half_inv)?;
    check_param("threshold", b, b > 1.0)?;
    let a = 1.0 - libm::pow(b, -half_inv + delta);
    Ok(a.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

/// Midpoint of the admissible `δ` interval, `1/(4(n-1))`.
pub fn default_schedule_delta(n: usize) -> f64 {
    0.25 / (n.max(2) - 1) as f64
}
