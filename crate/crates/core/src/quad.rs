//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Semi-infinite ranges `[c, ∞)` with `c > 0` are mapped onto `(0, 1]` by
//! `x = c t^(-1/κ)`. An integrand decaying like `x^(-κ-1)` becomes bounded
//! near `t = 0`, which is the situation for every tail integral in this
//! crate (`κ = α`). `κ = 1` is the usual `x = c/t` substitution.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// 10-point Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Stopping rule: `err ≤ max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }
}

impl From<f64> for Tolerance {
    /// A bare number is a relative tolerance.
    fn from(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Quadrature {
    fn zero() -> Self {
        Self { value: 0.0, abs_err: 0.0, evals: 0, converged: true }
    }

    fn add(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            abs_err: self.abs_err + other.abs_err,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

pub const MAX_SEGMENTS: usize = 4000;

#[derive(Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = finite_or_zero(f(center));
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = finite_or_zero(f(center - dx));
        let f2 = finite_or_zero(f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * libm::pow(200.0 * err / res_asc, 1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrates over consecutive breakpoints `points[0] < points[1] < ...`,
/// refining the worst segment anywhere in the range until the tolerance is met.
pub fn integrate_breaks<F, T>(mut f: F, points: &[f64], tol: T) -> Quadrature
where
    F: FnMut(f64) -> f64,
    T: Into<Tolerance>,
{
    let tol = tol.into();
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi.partial_cmp(&lo) != Some(core::cmp::Ordering::Greater) {
            continue;
        }
        let (v, e) = kronrod(&mut f, lo, hi);
        evals += 21;
        value += v;
        err += e;
        heap.push(Segment { lo, hi, value: v, err: e });
    }
    let mut converged = true;
    while err > tol.abs.max(tol.rel * value.abs()) {
        if heap.len() >= MAX_SEGMENTS {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // segment at floating-point resolution
            heap.push(Segment { err: 0.0, ..worst });
            err -= worst.err;
            converged = false;
            continue;
        }
        let (v1, e1) = kronrod(&mut f, worst.lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, worst.hi);
        evals += 42;
        value += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Segment { lo: worst.lo, hi: mid, value: v1, err: e1 });
        heap.push(Segment { lo: mid, hi: worst.hi, value: v2, err: e2 });
    }
    // re-sum to shed the drift of the running totals
    let (mut value, mut err) = (0.0, 0.0);
    for s in heap.iter() {
        value += s.value;
        err += s.err;
    }
    Quadrature { value, abs_err: err, evals, converged }
}

/// `∫_a^b f(x) dx`.
pub fn integrate<F, T>(f: F, a: f64, b: f64, tol: T) -> Quadrature
where
    F: FnMut(f64) -> f64,
    T: Into<Tolerance>,
{
    if b < a {
        let mut q = integrate_breaks(f, &[b, a], tol);
        q.value = -q.value;
        return q;
    }
    integrate_breaks(f, &[a, b], tol)
}

/// `∫_c^∞ f(x) dx` with interior breakpoints `breaks` (any order; those
/// outside `(c, ∞)` are ignored). `kappa` is the decay index of the integrand.
pub fn integrate_tail_breaks<F, T>(mut f: F, c: f64, kappa: f64, breaks: &[f64], tol: T) -> Quadrature
where
    F: FnMut(f64) -> f64,
    T: Into<Tolerance>,
{
    let tol = tol.into();
    if c > 0.0 {
        return mapped_tail(f, c, kappa, breaks, tol);
    }
    // finite head up to 1, mapped tail beyond
    let mut head: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    head.push(c);
    head.extend(breaks.iter().copied().filter(|&x| x > c && x < 1.0));
    head.push(1.0);
    sort_dedup(&mut head);
    let h = integrate_breaks(&mut f, &head, tol);
    let t = mapped_tail(&mut f, 1.0, kappa, breaks, tol);
    h.add(t)
}

fn mapped_tail<F: FnMut(f64) -> f64>(mut f: F, c: f64, kappa: f64, breaks: &[f64], tol: Tolerance) -> Quadrature {
    let inv = 1.0 / kappa;
    let scale = c * inv;
    let g = |t: f64| {
        let x = c * libm::pow(t, -inv);
        if !x.is_finite() {
            return 0.0;
        }
        finite_or_zero(f(x) * scale * libm::pow(t, -inv - 1.0))
    };
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(0.0);
    pts.extend(breaks.iter().copied().filter(|&x| x > c && x.is_finite()).map(|x| libm::pow(x / c, -kappa)));
    pts.push(1.0);
    sort_dedup(&mut pts);
    integrate_breaks(g, &pts, tol)
}

/// `∫_c^∞ f(x) dx`, see [`integrate_tail_breaks`].
pub fn integrate_tail<F, T>(f: F, c: f64, kappa: f64, tol: T) -> Quadrature
where
    F: FnMut(f64) -> f64,
    T: Into<Tolerance>,
{
    integrate_tail_breaks(f, c, kappa, &[], tol)
}

/// `∫_ℝ f(x) dx` for an integrand with both tails decaying like `|x|^(-κ-1)`.
pub fn integrate_real_line<F, T>(mut f: F, kappa: f64, tol: T) -> Quadrature
where
    F: FnMut(f64) -> f64,
    T: Into<Tolerance>,
{
    let tol = tol.into();
    let right = integrate_tail(&mut f, 0.0, kappa, tol);
    let left = integrate_tail(|x| f(-x), 0.0, kappa, tol);
    right.add(left)
}

pub(crate) fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup();
}

/// Sum of several independent quadratures.
pub fn sum<I: IntoIterator<Item = Quadrature>>(parts: I) -> Quadrature {
    parts.into_iter().fold(Quadrature::zero(), Quadrature::add)
}
