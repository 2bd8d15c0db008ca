//! Quadrature ground truth for short walks: `p_b` for `n ≤ 3` and the exact
//! second moment of the mixture estimator for `n ≤ 2`.

use alloc::vec::Vec;

use crate::dist::TailModel;
use crate::error::{Error, Result};
use crate::policy::{MixturePolicy, PolicyKind};
use crate::quad::{integrate_breaks, integrate_tail_breaks, sort_dedup, Quadrature, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleResult {
    pub value: f64,
    pub abs_error_bound: f64,
    pub node_count: usize,
}

impl OracleResult {
    fn exact(value: f64) -> Self {
        Self { value, abs_error_bound: 0.0, node_count: 0 }
    }
}

/// Relative tolerance of the outer integrals.
pub const ORACLE_REL_TOL: f64 = 1e-10;

fn outer_tol() -> Tolerance {
    Tolerance::new(0.0, ORACLE_REL_TOL)
}

fn inner_tol() -> Tolerance {
    Tolerance::new(0.0, 1e-12)
}

/// Breakpoints spreading quadrature effort over `[lo, hi]`: powers of ten
/// from both ends plus the midpoint.
fn convolution_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = alloc::vec![lo, 0.5 * (lo + hi), hi];
    let mut d = 1e-3;
    while lo + d < 0.5 * (lo + hi) {
        pts.push(lo + d);
        pts.push(hi - d);
        d *= 10.0;
    }
    sort_dedup(&mut pts);
    pts
}

fn finite_lower<M: TailModel + ?Sized>(model: &M) -> Result<f64> {
    let lo = model.support_lower();
    if lo.is_finite() {
        Ok(lo)
    } else {
        Err(Error::Config("the quadrature oracle needs a support bounded below"))
    }
}

/// `P(X_1 + X_2 > t)` as `F̄(t-L) + ∫_L^{t-L} f(x) F̄(t-x) dx` for support
/// `[L, ∞)`.
fn two_step_tail<M: TailModel + ?Sized>(model: &M, lo: f64, t: f64, tol: Tolerance) -> Quadrature {
    let head = model.tail(t - lo);
    if t - lo <= lo {
        return Quadrature { value: head, abs_err: 0.0, evals: 0, converged: true };
    }
    let pts = convolution_breaks(lo, t - lo);
    let mut q = integrate_breaks(|x| libm::exp(model.ln_density(x) + model.ln_tail(t - x)), &pts, tol);
    q.value += head;
    q
}

/// `P(S_n > b)` for `n ∈ {1, 2, 3}` by nested adaptive quadrature over the
/// convolution.
pub fn exact_tail_prob<M: TailModel + ?Sized>(model: &M, n: usize, b: f64) -> Result<OracleResult> {
    let lo = finite_lower(model)?;
    match n {
        1 => Ok(OracleResult::exact(model.tail(b))),
        2 => Ok(from_quad(two_step_tail(model, lo, b, outer_tol()))),
        3 => {
            // P(S_3 > b) = F̄(b - 2L) + ∫_L^{b-2L} f(x) P(S_2 > b - x) dx
            let head = model.tail(b - 2.0 * lo);
            if b - 2.0 * lo <= lo {
                return Ok(OracleResult::exact(head));
            }
            let mut inner_err = 0.0f64;
            let mut inner_evals = 0;
            let pts = convolution_breaks(lo, b - 2.0 * lo);
            let q = integrate_breaks(
                |x| {
                    let inner = two_step_tail(model, lo, b - x, inner_tol());
                    inner_err = inner_err.max(inner.abs_err);
                    inner_evals += inner.evals;
                    model.density(x) * inner.value
                },
                &pts,
                outer_tol(),
            );
            let mut r = from_quad(q);
            r.value += head;
            r.abs_error_bound += inner_err;
            r.node_count += inner_evals;
            Ok(r)
        }
        _ => Err(Error::WalkLength { n, reason: "the quadrature oracle covers n ≤ 3" }),
    }
}

fn from_quad(q: Quadrature) -> OracleResult {
    OracleResult { value: q.value, abs_error_bound: q.abs_err, node_count: q.evals }
}

/// Points where the step density of `policy` at `(i, s)` may jump.
fn kinks(policy: &MixturePolicy, i: usize, s: f64, b: f64) -> Vec<f64> {
    let n = policy.n();
    if s > b {
        return Vec::new();
    }
    let mut pts = Vec::new();
    match *policy.kind() {
        PolicyKind::Conditional { a } | PolicyKind::Gpd { a } => {
            pts.push(a * (b - s));
            pts.push(b - s);
        }
        PolicyKind::ScalingI { lambda, .. } => pts.push(lambda * b),
        PolicyKind::ScalingII { lambda, u, delta, .. } => {
            pts.push(lambda * b * libm::pow(u, 1.0 + delta));
            pts.push(lambda * b * u);
            pts.push(lambda * b);
        }
    }
    if i == n {
        pts.push(b - s);
    }
    pts
}

/// `E p̂_b²` for the mixture estimator with `n ≤ 2`:
/// `∫ I{s_n > b} Π f(x_i)² / ν_i(x_i | s_{i-1}) dx` by nested quadrature.
pub fn exact_is_second_moment<M: TailModel + ?Sized>(
    policy: &MixturePolicy,
    model: &M,
    b: f64,
) -> Result<OracleResult> {
    let lo = finite_lower(model)?;
    let kappa = model.alpha();
    let n = policy.n();
    // f(x)²/ν(x) in log space
    let ratio = |i: usize, s: f64, x: f64| {
        let lf = model.ln_density(x);
        if lf == f64::NEG_INFINITY {
            return 0.0;
        }
        libm::exp(2.0 * lf - policy.step_ln_density(i, s, b, model, x))
    };
    match n {
        1 => {
            let q =
                integrate_tail_breaks(|x| ratio(1, 0.0, x), b.max(lo), kappa, &kinks(policy, 1, 0.0, b), outer_tol());
            Ok(from_quad(q))
        }
        2 => {
            let mut inner_err = 0.0f64;
            let mut inner_evals = 0;
            let mut outer_breaks = kinks(policy, 1, 0.0, b);
            outer_breaks.push(b);
            outer_breaks.extend(convolution_breaks(lo, b.max(lo + 1.0)));
            let q = integrate_tail_breaks(
                |x1| {
                    let r1 = ratio(1, 0.0, x1);
                    if r1 == 0.0 {
                        return 0.0;
                    }
                    let c = (b - x1).max(lo);
                    let inner =
                        integrate_tail_breaks(|x2| ratio(2, x1, x2), c, kappa, &kinks(policy, 2, x1, b), inner_tol());
                    inner_err = inner_err.max(inner.abs_err * r1);
                    inner_evals += inner.evals;
                    r1 * inner.value
                },
                lo,
                kappa,
                &outer_breaks,
                outer_tol(),
            );
            let mut r = from_quad(q);
            r.abs_error_bound += inner_err;
            r.node_count += inner_evals;
            if !r.value.is_finite() {
                return Err(Error::Divergent { index: 1 });
            }
            Ok(r)
        }
        _ => Err(Error::WalkLength { n, reason: "the second-moment oracle covers n ≤ 2" }),
    }
}
