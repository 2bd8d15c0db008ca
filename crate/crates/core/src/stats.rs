//! Streaming aggregation of per-draw estimator values.
//!
//! [`Moments`] is a mergeable single-pass accumulator: workers aggregate
//! locally and combine with [`Moments::merge`], which is associative up to
//! rounding.

use alloc::vec::Vec;

use crate::dist::TailModel;
use crate::error::{check_param, Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    // compensated Σv²
    sq_sum: f64,
    sq_comp: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
        self.add_sq(v * v);
    }

    fn add_sq(&mut self, x: f64) {
        let t = self.sq_sum + x;
        if self.sq_sum.abs() >= x.abs() {
            self.sq_comp += (self.sq_sum - t) + x;
        } else {
            self.sq_comp += (x - t) + self.sq_sum;
        }
        self.sq_sum = t;
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        self.mean += d * nb / n;
        self.m2 += other.m2 + d * d * na * nb / n;
        self.count += other.count;
        self.add_sq(other.sq_sum);
        self.sq_comp += other.sq_comp;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// `Σv² / N`.
    pub fn mean_square(&self) -> f64 {
        (self.sq_sum + self.sq_comp) / self.count as f64
    }

    pub fn finish(&self, reference: f64, wall_time_s: f64) -> Result<EstimatorResult> {
        if self.count < 2 {
            return Err(Error::Config("aggregation needs at least two values"));
        }
        check_param("reference", reference, reference > 0.0)?;
        let n = self.count as f64;
        let sd = libm::sqrt(self.variance());
        let estimate = self.mean;
        Ok(EstimatorResult {
            estimate,
            std_err: sd / libm::sqrt(n),
            rel_err: if estimate > 0.0 { Some(sd / estimate) } else { None },
            nsm: self.mean_square() / (reference * reference),
            wall_time_s,
            n_samples: self.count,
        })
    }
}

impl Extend<f64> for Moments {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.push(v);
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        m.extend(iter);
        m
    }
}

/// Summary of `N` draws of one estimator.
///
/// `rel_err` is the per-draw relative error `sd / mean`; the relative error
/// of the estimate itself is `rel_err / √N`. It is `None` when every draw was
/// zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorResult {
    pub estimate: f64,
    pub std_err: f64,
    pub rel_err: Option<f64>,
    pub nsm: f64,
    pub wall_time_s: f64,
    pub n_samples: u64,
}

/// Aggregates `values` against the second-moment `reference` (usually
/// [`subexp_reference`]). Wall time is left at zero.
pub fn aggregate<I: IntoIterator<Item = f64>>(values: I, reference: f64) -> Result<EstimatorResult> {
    values.into_iter().collect::<Moments>().finish(reference, 0.0)
}

/// `n F̄(b)`, the one-big-jump approximation of `p_b`.
pub fn subexp_reference<M: TailModel + ?Sized>(model: &M, n: usize, b: f64) -> f64 {
    n as f64 * model.tail(b)
}

/// Averages over `R` independent repetitions, the layout of a results table
/// cell, plus the pooled `R·N`-draw second moment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RepetitionSummary {
    pub repetitions: usize,
    pub mean_estimate: f64,
    pub mean_std_err: f64,
    pub mean_time_s: f64,
    /// Standard deviation of the per-repetition estimates.
    pub sd_estimate: f64,
    /// Normalized second moment over all draws.
    pub nsm: f64,
    /// Standard error of `nsm`, from the spread of per-repetition values.
    pub nsm_std_err: f64,
}

pub fn summarize(reps: &[EstimatorResult], pooled_nsm: f64) -> Result<RepetitionSummary> {
    if reps.is_empty() {
        return Err(Error::Config("no repetitions to summarize"));
    }
    let r = reps.len() as f64;
    let est: Moments = reps.iter().map(|x| x.estimate).collect();
    let nsm: Moments = reps.iter().map(|x| x.nsm).collect();
    Ok(RepetitionSummary {
        repetitions: reps.len(),
        mean_estimate: est.mean(),
        mean_std_err: reps.iter().map(|x| x.std_err).sum::<f64>() / r,
        mean_time_s: reps.iter().map(|x| x.wall_time_s).sum::<f64>() / r,
        sd_estimate: libm::sqrt(est.variance()),
        nsm: pooled_nsm,
        nsm_std_err: libm::sqrt(nsm.variance() / r),
    })
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &mut [f64], mut cdf: F) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0, |d, (k, &x)| {
        let c = cdf(x);
        let lo = c - k as f64 / n;
        let hi = (k + 1) as f64 / n - c;
        d.max(lo).max(hi)
    })
}

/// Asymptotic p-value of the KS statistic `d` at sample size `n`, with
/// Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = libm::sqrt(n as f64);
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Weighted least-squares slope of `y` on `x` with per-point standard errors
/// `se`, returning `(slope, slope_std_err)`.
pub fn weighted_slope(x: &[f64], y: &[f64], se: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() != se.len() || x.len() < 2 {
        return Err(Error::Config("trend needs matching inputs with at least two points"));
    }
    let w: Vec<f64> = se.iter().map(|s| 1.0 / (s * s).max(f64::MIN_POSITIVE)).collect();
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Config("trend needs at least two distinct abscissae"));
    }
    Ok((sxy / sxx, libm::sqrt(1.0 / sxx)))
}
