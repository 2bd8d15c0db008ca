//! Normalized second moment across a grid of thresholds.

use anyhow::{ensure, Result};
use htis_core::analysis::BoundReport;
use htis_core::estimators::{EstimatorKind, EstimatorSpec};
use htis_core::stats::{summarize, weighted_slope};
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorTemplate, ModelSpec, OutputSpec};
use crate::runner::{pooled_nsm, reference_value, resolve, run_cells, Cell, RunOptions};
use crate::seeds::cell_id;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Grid {
    List(Vec<f64>),
    /// `points` thresholds from `from` to `to`, evenly spaced in `log b`.
    Geometric {
        from: f64,
        to: f64,
        points: usize,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Geometric { from, to, points } => {
                if points == 1 {
                    return vec![from];
                }
                // rounded to 12 significant digits so decade grids land on round numbers
                let ratio = to / from;
                let mut v: Vec<f64> = (0..points)
                    .map(|k| from * ratio.powf(k as f64 / (points - 1) as f64))
                    .map(|x| format!("{x:.11e}").parse().expect("formatted float"))
                    .collect();
                v[points - 1] = to;
                v
            }
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub b_grid: Grid,
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Reuse the same substreams at every threshold, so that differences
    /// between grid points are not swamped by independent noise.
    #[serde(default = "yes")]
    pub common_random_numbers: bool,
    #[serde(default)]
    pub output: OutputSpec,
    pub estimators: Vec<EstimatorTemplate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub b: f64,
    /// `a` actually used, for mixture policies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    pub mean_estimate: f64,
    pub reference: f64,
    pub nsm: f64,
    pub nsm_std_err: f64,
    /// Asymptotic second-moment bound at the weights used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub estimator: String,
    pub method: String,
    pub points: Vec<SweepPoint>,
    /// Weighted least-squares slope of `nsm` against `log10 b`.
    pub slope_per_decade: Option<f64>,
    pub slope_std_err: Option<f64>,
    /// `(nsm_first - nsm_last) / se`; positive when `nsm` decreases.
    pub decrease_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub model: ModelSpec,
    pub n: usize,
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub trends: Vec<Trend>,
}

fn z_decrease(first: &SweepPoint, last: &SweepPoint) -> f64 {
    let diff = first.nsm - last.nsm;
    let se = first.nsm_std_err.hypot(last.nsm_std_err);
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Fit over the points with a positive standard error.
fn trend_slope(points: &[SweepPoint]) -> Option<(f64, f64)> {
    let usable: Vec<&SweepPoint> = points.iter().filter(|p| p.nsm_std_err > 0.0).collect();
    let x: Vec<f64> = usable.iter().map(|p| p.b.log10()).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.nsm).collect();
    let se: Vec<f64> = usable.iter().map(|p| p.nsm_std_err).collect();
    weighted_slope(&x, &y, &se).ok().filter(|(s, e)| s.is_finite() && e.is_finite())
}

pub fn run_efficiency_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<SweepReport> {
    let model = cfg.model.build()?;
    let bs = cfg.b_grid.values();
    ensure!(cfg.n >= 1, "walk length must be at least 1");
    ensure!(cfg.samples >= 2 && cfg.repetitions >= 2, "a sweep needs samples ≥ 2 and repetitions ≥ 2");
    ensure!(!bs.is_empty() && !cfg.estimators.is_empty(), "empty sweep");
    for &b in &bs {
        ensure!(b.is_finite() && (b > 0.0 || !cfg.model.positive_support()), "bad threshold {b}");
    }
    let mut cells = Vec::new();
    let mut bounds = Vec::new();
    for t in &cfg.estimators {
        for &b in &bs {
            let kind = resolve(t, &model, cfg.n, b)?;
            let bound = match &kind {
                EstimatorKind::MixtureIs(p) => {
                    Some((p.kind().a(), BoundReport::for_policy(*p.kind(), &model, p.weights(), cfg.n)?.bound_value))
                }
                _ => None,
            };
            let (reference, _) = reference_value(&model, cfg.n, b);
            let key = if cfg.common_random_numbers { 0.0 } else { b };
            cells.push(Cell {
                label: t.label().to_owned(),
                spec: EstimatorSpec::new(kind, model, cfg.n, b)?,
                reference,
                stream: cell_id(t.label(), cfg.n, key),
            });
            bounds.push(bound);
        }
    }
    let results = run_cells(&cells, cfg.samples, cfg.repetitions, cfg.seed, false, opts)?;
    let mut trends = Vec::new();
    for (k, t) in cfg.estimators.iter().enumerate() {
        let range = k * bs.len()..(k + 1) * bs.len();
        let mut points = Vec::with_capacity(bs.len());
        for j in range.clone() {
            let s = summarize(&results[j], pooled_nsm(&results[j]))?;
            points.push(SweepPoint {
                b: cells[j].spec.b(),
                a: bounds[j].map(|(a, _)| a),
                mean_estimate: s.mean_estimate,
                reference: cells[j].reference,
                nsm: s.nsm,
                nsm_std_err: s.nsm_std_err,
                bound: bounds[j].map(|(_, v)| v),
            });
        }
        let slope = trend_slope(&points);
        trends.push(Trend {
            estimator: t.label().to_owned(),
            method: cells[range.start].spec.kind().name().to_owned(),
            decrease_z: z_decrease(&points[0], &points[points.len() - 1]),
            slope_per_decade: slope.map(|s| s.0),
            slope_std_err: slope.map(|s| s.1),
            points,
        });
    }
    Ok(SweepReport {
        model: cfg.model,
        n: cfg.n,
        samples: cfg.samples,
        repetitions: cfg.repetitions,
        seed: cfg.seed,
        trends,
    })
}
