//! Asymptotic upper bounds on the normalized second moment
//! `E p̂_b² / (n F̄(b))²` of the mixture samplers, and the scaling-parameter
//! optimizer.
//!
//! The general bound takes per-step functions `h_i(y)` and weights `p_i`:
//!
//! ```text
//! (1/n²) Σ_{i=1..n} Π_{j<i} (1/p_j) (1/q_i) ∫_1^∞ h_i(y) α y^(-α-1) dy,   q_n = 1.
//! ```

use alloc::vec::Vec;

use crate::dist::TailModel;
use crate::error::{check_param, Error, Result};
use crate::optimize::{golden_section, is_unimodal};
use crate::policy::{MixWeight, PolicyKind};
use crate::quad::{integrate_breaks, integrate_tail, integrate_tail_breaks, Quadrature, Tolerance};

const REL_TOL: f64 = 1e-10;

fn tol() -> Tolerance {
    Tolerance::new(0.0, REL_TOL)
}

fn checked(q: Quadrature, index: usize) -> Result<f64> {
    if q.converged && q.value.is_finite() {
        Ok(q.value)
    } else {
        Err(Error::Divergent { index })
    }
}

/// A computed bound with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub kind: PolicyKind,
    pub n: usize,
    pub alpha: f64,
    pub p: Vec<f64>,
    pub bound_value: f64,
    /// `∫_1^∞ h_i α y^(-α-1) dy` for each step.
    pub integral_terms: Vec<f64>,
}

impl BoundReport {
    /// The bound for a shipped policy at the given weights. Scaling kinds
    /// need the model density.
    pub fn for_policy<M: TailModel + ?Sized>(
        kind: PolicyKind,
        model: &M,
        weights: &[MixWeight],
        n: usize,
    ) -> Result<Self> {
        kind.validate()?;
        let alpha = model.alpha();
        let terms: Vec<f64> = match kind {
            PolicyKind::Conditional { a } | PolicyKind::Gpd { a } => {
                (1..=n).map(|i| if i < n { libm::pow(a, -alpha) } else { 1.0 }).collect()
            }
            PolicyKind::ScalingI { lambda, .. } => {
                let f = scaling_bound_factor(model, lambda)?;
                alloc::vec![f; n]
            }
            PolicyKind::ScalingII { lambda, u, delta, .. } => {
                let (t1, t2) = sm2_bound_terms(model, lambda, u, delta)?;
                alloc::vec![t1 + t2; n]
            }
        };
        let bound_value = weighted_sum(weights, &terms, n)?;
        Ok(Self { kind, n, alpha, p: weights.iter().map(|w| w.p).collect(), bound_value, integral_terms: terms })
    }
}

/// `(1/n²) Σ_i Π_{j<i}(1/p_j) (1/q_i) terms[i]` with `q_n = 1`.
fn weighted_sum(weights: &[MixWeight], terms: &[f64], n: usize) -> Result<f64> {
    if weights.len() + 1 != n {
        return Err(Error::WeightCount { expected: n.saturating_sub(1), got: weights.len() });
    }
    let mut prod = 1.0;
    let mut total = 0.0;
    for (i, &t) in terms.iter().enumerate() {
        let q = if i + 1 < n { weights[i].q } else { 1.0 };
        total += prod * t / q;
        if i + 1 < n {
            prod /= weights[i].p;
        }
    }
    Ok(total / (n * n) as f64)
}

/// The general bound for user-supplied `h(i, y)`, `i = 1..n`. Each integral is
/// computed adaptively; a divergent one is reported with its step index.
pub fn thm_main_bound<H>(mut h: H, weights: &[MixWeight], n: usize, alpha: f64) -> Result<(f64, Vec<f64>)>
where
    H: FnMut(usize, f64) -> f64,
{
    check_param("alpha", alpha, alpha > 0.0)?;
    if n == 0 {
        return Err(Error::WalkLength { n, reason: "a walk needs at least one step" });
    }
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        let q = integrate_tail(|y| h(i, y) * alpha * libm::pow(y, -alpha - 1.0), 1.0, alpha, tol());
        terms.push(checked(q, i)?);
    }
    Ok((weighted_sum(weights, &terms, n)?, terms))
}

/// Closed-form bound for the conditional and GPD mixtures:
/// `(1/n²)(Σ_{i<n} a^(-α)/q_i Π_{j<i} 1/p_j + Π_{j<n} 1/p_j)`.
pub fn condmix_bound(n: usize, alpha: f64, a: f64, weights: &[MixWeight]) -> Result<f64> {
    let c = libm::pow(a, -alpha);
    let terms: Vec<f64> = (1..=n).map(|i| if i < n { c } else { 1.0 }).collect();
    weighted_sum(weights, &terms, n)
}

/// The minimum of [`condmix_bound`] over the weights:
/// `n^(-2) [(n-1) a^(-α/2) + 1]²`.
pub fn condmix_min(n: usize, alpha: f64, a: f64) -> f64 {
    let v = (n - 1) as f64 * libm::pow(a, -0.5 * alpha) + 1.0;
    v * v / (n * n) as f64
}

/// `h_i` of the conditional and GPD mixtures.
pub fn condmix_h(n: usize, alpha: f64, a: f64) -> impl Fn(usize, f64) -> f64 {
    let c = libm::pow(a, -alpha);
    move |i, _| if i < n { c } else { 1.0 }
}

/// `h(y) = αλ / (y^(α+1) f(y/λ))` of the first scaling mixture.
pub fn scaling_h<M: TailModel + ?Sized>(model: &M, lambda: f64) -> impl Fn(usize, f64) -> f64 + '_ {
    let alpha = model.alpha();
    move |_, y| {
        libm::exp(libm::log(alpha) + libm::log(lambda) - (alpha + 1.0) * libm::log(y) - model.ln_density(y / lambda))
    }
}

/// `λ^(-2α) ∫_{1/λ}^∞ α² / (x^(2α+2) f(x)) dx`, the large-`b` normalized
/// second moment of the first scaling mixture at its optimal weights.
pub fn scaling_bound_factor<M: TailModel + ?Sized>(model: &M, lambda: f64) -> Result<f64> {
    check_param("lambda", lambda, lambda > 0.0 && lambda.is_finite())?;
    let alpha = model.alpha();
    let ln_a2 = 2.0 * libm::log(alpha);
    let integrand = |x: f64| libm::exp(ln_a2 - (2.0 * alpha + 2.0) * libm::log(x) - model.ln_density(x));
    let q = integrate_tail(integrand, 1.0 / lambda, alpha, tol());
    Ok(libm::pow(lambda, -2.0 * alpha) * checked(q, 1)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaOptimum {
    pub lambda: f64,
    pub factor: f64,
    /// `false` when the pre-scan was not unimodal; the result is then the
    /// best scan point.
    pub unimodal: bool,
}

/// Default search interval for `λ`.
pub const LAMBDA_RANGE: (f64, f64) = (0.05, 50.0);

const SCAN_POINTS: usize = 64;

/// Minimises [`scaling_bound_factor`] over `λ ∈ [lo, hi]` by golden-section
/// search in `log λ`, after a 64-point unimodality scan.
pub fn optimize_lambda<M: TailModel + ?Sized>(model: &M, lo: f64, hi: f64) -> Result<LambdaOptimum> {
    check_param("lambda lower", lo, lo > 0.0 && lo.is_finite())?;
    check_param("lambda upper", hi, hi >= lo && hi.is_finite())?;
    if hi == lo {
        return Ok(LambdaOptimum { lambda: lo, factor: scaling_bound_factor(model, lo)?, unimodal: true });
    }
    let (llo, lhi) = (libm::log(lo), libm::log(hi));
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|k| llo + (lhi - llo) * k as f64 / (SCAN_POINTS - 1) as f64).collect();
    let values = grid.iter().map(|&t| scaling_bound_factor(model, libm::exp(t))).collect::<Result<Vec<f64>>>()?;
    if !is_unimodal(&values, 1e-9) {
        let (k, &factor) = values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("scan is non-empty");
        return Ok(LambdaOptimum { lambda: libm::exp(grid[k]), factor, unimodal: false });
    }
    // narrow to the scan cell around the minimum before refining
    let k = values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).map(|(k, _)| k).unwrap_or(0);
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(SCAN_POINTS - 1)];
    let mut err = None;
    let m = golden_section(
        |t| match scaling_bound_factor(model, libm::exp(t)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        1e-9,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(LambdaOptimum { lambda: libm::exp(m.x), factor: m.value, unimodal: true })
}

/// The two integrals of the second scaling mixture's bound:
///
/// ```text
/// ∫_1^{λu} α²λ / (x^(2α+2) f(x/λ)) dx
/// ∫_{λu^(1+δ)}^∞ (1+δ) α² λ^(1/(1+δ)) / (x^(2α+1/(1+δ)+1) f((x/λ)^(1/(1+δ)))) dx
/// ```
///
/// The first is zero when `λu ≤ 1`.
pub fn sm2_bound_terms<M: TailModel + ?Sized>(model: &M, lambda: f64, u: f64, delta: f64) -> Result<(f64, f64)> {
    check_param("lambda", lambda, lambda > 0.0 && lambda.is_finite())?;
    check_param("u", u, u > 0.0 && u < 1.0)?;
    check_param("delta", delta, delta > 0.0 && delta.is_finite())?;
    let alpha = model.alpha();
    let ln_a2 = 2.0 * libm::log(alpha);
    let (ln_l, r) = (libm::log(lambda), 1.0 / (1.0 + delta));

    let upper = lambda * u;
    let term1 = if upper > 1.0 {
        let g = |x: f64| libm::exp(ln_a2 + ln_l - (2.0 * alpha + 2.0) * libm::log(x) - model.ln_density(x / lambda));
        checked(integrate_breaks(g, &[1.0, upper], tol()), 1)?
    } else {
        0.0
    };

    let lower = lambda * libm::pow(u, 1.0 + delta);
    let g = |x: f64| {
        let lx = libm::log(x);
        libm::exp(
            libm::log(1.0 + delta) + ln_a2 + r * ln_l
                - (2.0 * alpha + r + 1.0) * lx
                - model.ln_density(libm::exp(r * (lx - ln_l))),
        )
    };
    // integrand decays like x^(-1-α(2-r)) for regularly varying f
    let kappa = alpha * (2.0 - r);
    let term2 = checked(integrate_tail_breaks(g, lower, kappa, &[lambda], tol()), 2)?;
    Ok((term1, term2))
}

/// The bound of the second scaling mixture: `(1/n²) Σ ... × (term1 + term2)`.
pub fn sm2_bound<M: TailModel + ?Sized>(
    model: &M,
    lambda: f64,
    u: f64,
    delta: f64,
    weights: &[MixWeight],
    n: usize,
) -> Result<f64> {
    let (t1, t2) = sm2_bound_terms(model, lambda, u, delta)?;
    weighted_sum(weights, &alloc::vec![t1 + t2; n], n)
}
