//! Heavy-tailed increment laws and their exact samplers.
//!
//! A law is described by its density, tail `F̄(x) = P(X > x)`, quantile and
//! tail index. Tail-side quantities are also exposed in log form: at
//! `b = 5e11` the tail of a Pareto(1/2) law is about `1.4e-6` and products of
//! such factors leave the range of `f64` quickly.

use rand_core::RngCore;

use crate::error::{check_param, Error, Result};
use crate::uniform::open_unit;

/// A regularly varying law given by exact function evaluations.
///
/// Implementors must supply `quantile`; there is no internal root finding.
/// `inv_ln_tail` has a default built on `quantile`, which loses accuracy once
/// `F̄(x)` drops below about `1e-16`; closed-form models should override it.
pub trait TailModel {
    /// Tail index `α`.
    fn alpha(&self) -> f64;

    /// `log f(x)`, `-∞` off the support.
    fn ln_density(&self, x: f64) -> f64;

    /// `log F̄(x)`.
    fn ln_tail(&self, x: f64) -> f64;

    /// `F^←(u)` for `u ∈ (0, 1)`.
    fn quantile(&self, u: f64) -> f64;

    /// Left edge of the support.
    fn support_lower(&self) -> f64 {
        0.0
    }

    fn density(&self, x: f64) -> f64 {
        libm::exp(self.ln_density(x))
    }

    fn tail(&self, x: f64) -> f64 {
        libm::exp(self.ln_tail(x))
    }

    /// The point `x` with `log F̄(x) = lt`.
    fn inv_ln_tail(&self, lt: f64) -> f64 {
        self.quantile(-libm::expm1(lt))
    }
}

impl<M: TailModel + ?Sized> TailModel for &M {
    fn alpha(&self) -> f64 {
        (**self).alpha()
    }
    fn ln_density(&self, x: f64) -> f64 {
        (**self).ln_density(x)
    }
    fn ln_tail(&self, x: f64) -> f64 {
        (**self).ln_tail(x)
    }
    fn quantile(&self, u: f64) -> f64 {
        (**self).quantile(u)
    }
    fn support_lower(&self) -> f64 {
        (**self).support_lower()
    }
    fn density(&self, x: f64) -> f64 {
        (**self).density(x)
    }
    fn tail(&self, x: f64) -> f64 {
        (**self).tail(x)
    }
    fn inv_ln_tail(&self, lt: f64) -> f64 {
        (**self).inv_ln_tail(lt)
    }
}

/// Pareto law on `(0, ∞)` with `f(x) = α(1+x)^(-α-1)` and `F̄(x) = (1+x)^(-α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pareto {
    alpha: f64,
}

impl Pareto {
    pub fn new(alpha: f64) -> Result<Self> {
        let alpha = check_param("alpha", alpha, alpha > 0.0 && alpha.is_finite())?;
        Ok(Self { alpha })
    }
}

impl TailModel for Pareto {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn ln_density(&self, x: f64) -> f64 {
        if x > 0.0 {
            libm::log(self.alpha) - (self.alpha + 1.0) * libm::log1p(x)
        } else {
            f64::NEG_INFINITY
        }
    }

    fn ln_tail(&self, x: f64) -> f64 {
        if x > 0.0 {
            -self.alpha * libm::log1p(x)
        } else {
            0.0
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        libm::expm1(-libm::log1p(-u) / self.alpha)
    }

    fn inv_ln_tail(&self, lt: f64) -> f64 {
        libm::expm1(-lt / self.alpha)
    }
}

/// Two-sided law on `ℝ` with `f(x) = (α/2)(1+|x|)^(-α-1)`.
///
/// Used to exercise the negative branch of the scaling samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetricPareto {
    alpha: f64,
}

impl SymmetricPareto {
    pub fn new(alpha: f64) -> Result<Self> {
        let alpha = check_param("alpha", alpha, alpha > 0.0 && alpha.is_finite())?;
        Ok(Self { alpha })
    }
}

impl TailModel for SymmetricPareto {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn support_lower(&self) -> f64 {
        f64::NEG_INFINITY
    }

    fn ln_density(&self, x: f64) -> f64 {
        libm::log(0.5 * self.alpha) - (self.alpha + 1.0) * libm::log1p(x.abs())
    }

    fn ln_tail(&self, x: f64) -> f64 {
        if x >= 0.0 {
            -core::f64::consts::LN_2 - self.alpha * libm::log1p(x)
        } else {
            libm::log1p(-0.5 * libm::exp(-self.alpha * libm::log1p(-x)))
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u >= 0.5 {
            // (2(1-u))^(-1/α) - 1
            libm::expm1(-(core::f64::consts::LN_2 + libm::log1p(-u)) / self.alpha)
        } else {
            -libm::expm1(-libm::log(2.0 * u) / self.alpha)
        }
    }

    fn inv_ln_tail(&self, lt: f64) -> f64 {
        if lt <= -core::f64::consts::LN_2 {
            libm::expm1(-(core::f64::consts::LN_2 + lt) / self.alpha)
        } else {
            // F(x) = 1 - e^lt = ½(1-x)^(-α)
            let cdf = -libm::expm1(lt);
            -libm::expm1(-libm::log(2.0 * cdf) / self.alpha)
        }
    }
}

/// Hazard-rate twist of a base law: `dF_θ ∝ e^{θΛ} dF` with `Λ = -log F̄`.
///
/// For continuous `F` the normaliser is `1/(1-θ)`, the twisted tail is
/// `F̄^(1-θ)` and the twisted density is `(1-θ) f F̄^(-θ)`. A Pareto(α) base
/// becomes Pareto(α(1-θ)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazardTwisted<M> {
    base: M,
    theta: f64,
}

impl<M: TailModel> HazardTwisted<M> {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn base(&self) -> &M {
        &self.base
    }
}

/// Twists `model` by `θ ∈ (0, 1)`.
pub fn hazard_twist<M: TailModel>(model: M, theta: f64) -> Result<HazardTwisted<M>> {
    let theta = check_param("theta", theta, theta > 0.0 && theta < 1.0)?;
    Ok(HazardTwisted { base: model, theta })
}

impl<M: TailModel> TailModel for HazardTwisted<M> {
    fn alpha(&self) -> f64 {
        self.base.alpha() * (1.0 - self.theta)
    }

    fn support_lower(&self) -> f64 {
        self.base.support_lower()
    }

    fn ln_density(&self, x: f64) -> f64 {
        let lf = self.base.ln_density(x);
        if lf == f64::NEG_INFINITY {
            return lf;
        }
        libm::log(1.0 - self.theta) + lf - self.theta * self.base.ln_tail(x)
    }

    fn ln_tail(&self, x: f64) -> f64 {
        (1.0 - self.theta) * self.base.ln_tail(x)
    }

    fn quantile(&self, u: f64) -> f64 {
        self.inv_ln_tail(libm::log1p(-u))
    }

    fn inv_ln_tail(&self, lt: f64) -> f64 {
        self.base.inv_ln_tail(lt / (1.0 - self.theta))
    }
}

/// Draws from the model law by inversion, `F^←(U)`.
pub fn sample<M, R>(model: &M, rng: &mut R) -> f64
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    model.quantile(open_unit(rng))
}

/// The inversion map for the law conditioned on `X > c`:
/// `F^←(1 - u F̄(c))`, evaluated on the tail side.
pub fn conditional_quantile<M: TailModel + ?Sized>(model: &M, c: f64, u: f64) -> Result<f64> {
    let ln_tail_c = model.ln_tail(c);
    if ln_tail_c == f64::NEG_INFINITY {
        return Err(Error::UnreachableTail { level: c });
    }
    let x = model.inv_ln_tail(libm::log(u) + ln_tail_c);
    // u near 1 can round back onto the conditioning level
    Ok(if x > c { x } else { c.next_up() })
}

/// Draws from the law conditioned on `X > c`.
pub fn sample_conditional_above<M, R>(model: &M, c: f64, rng: &mut R) -> Result<f64>
where
    M: TailModel + ?Sized,
    R: RngCore + ?Sized,
{
    if c <= model.support_lower() {
        return Ok(sample(model, rng));
    }
    conditional_quantile(model, c, open_unit(rng))
}

/// Inversion map of the generalized Pareto tail above `c`: `c u^(-1/α)`.
pub fn gpd_quantile(alpha: f64, c: f64, u: f64) -> f64 {
    let x = c * libm::exp(-libm::log(u) / alpha);
    if x > c {
        x
    } else {
        c.next_up()
    }
}

/// Draws from the density `α c^α x^(-α-1)` on `x > c`.
pub fn sample_gpd_tail<R: RngCore + ?Sized>(alpha: f64, c: f64, rng: &mut R) -> Result<f64> {
    check_param("gpd level", c, c > 0.0 && c.is_finite())?;
    check_param("alpha", alpha, alpha > 0.0)?;
    Ok(gpd_quantile(alpha, c, open_unit(rng)))
}

/// `log` of the generalized Pareto density above `c`.
pub fn gpd_ln_density(alpha: f64, c: f64, x: f64) -> f64 {
    if x > c {
        libm::log(alpha) + alpha * libm::log(c) - (alpha + 1.0) * libm::log(x)
    } else {
        f64::NEG_INFINITY
    }
}
