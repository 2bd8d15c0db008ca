//! Estimator × (n, b) grids with independent, parallel repetitions.
//!
//! Each (cell, repetition) task draws from its own substream and reduces its
//! `N` draws serially. Task results are collected in task order and merged
//! serially, so the report is bit-identical for any worker count.

use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use htis_core::analysis::{optimize_lambda, LAMBDA_RANGE};
use htis_core::dist::TailModel;
use htis_core::estimators::{EstimatorKind, EstimatorSpec};
use htis_core::oracle::exact_tail_prob;
use htis_core::policy::{default_schedule_delta, optimality_schedule_a, MixWeight, MixturePolicy, PolicyKind};
use htis_core::stats::{subexp_reference, summarize, EstimatorResult, Moments, RepetitionSummary};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorTemplate, ExperimentConfig, Method, Model, ModelSpec, Param};
use crate::seeds::{cell_id, substream};

/// Relative gap between a quoted true value and the computed reference above
/// which the cell is flagged.
pub const QUOTE_MISMATCH: f64 = 0.01;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Thread count; `None` uses the rayon default.
    pub workers: Option<usize>,
}

/// Resolves a template into a concrete estimator for one `(n, b)`.
pub fn resolve(t: &EstimatorTemplate, model: &Model, n: usize, b: f64) -> Result<EstimatorKind> {
    let label = t.label();
    let ctx = || format!("estimator `{label}` at n = {n}, b = {b:e}");
    t.check()?;
    Ok(match t.method {
        Method::Mc => EstimatorKind::StandardMc,
        Method::Ab => EstimatorKind::AsmussenBinswanger(t.order.unwrap_or_default()),
        Method::Ak => EstimatorKind::AsmussenKroese,
        Method::Hazard => {
            if model.support_lower() < 0.0 {
                bail!("{}: hazard twisting needs a positive-support model", ctx());
            }
            EstimatorKind::HazardTwist { theta: t.theta.expect("checked") }
        }
        m => {
            let a = match t.a.expect("checked") {
                Param::Fixed(a) => a,
                Param::Auto(_) => {
                    let delta = t.schedule_delta.unwrap_or_else(|| default_schedule_delta(n));
                    optimality_schedule_a(b, n, delta).with_context(ctx)?
                }
            };
            let lambda = || -> Result<f64> {
                Ok(match t.lambda.expect("checked") {
                    Param::Fixed(l) => l,
                    Param::Auto(_) => optimize_lambda(model, LAMBDA_RANGE.0, LAMBDA_RANGE.1).with_context(ctx)?.lambda,
                })
            };
            let kind = match m {
                Method::Conditional => PolicyKind::Conditional { a },
                Method::Gpd => PolicyKind::Gpd { a },
                Method::ScalingI => PolicyKind::ScalingI { lambda: lambda()?, a },
                Method::ScalingII => PolicyKind::ScalingII {
                    lambda: lambda()?,
                    u: t.u.expect("checked"),
                    delta: t.delta.expect("checked"),
                    a,
                },
                _ => unreachable!("non-mixture methods handled above"),
            };
            if kind.is_scaling() && b <= 0.0 {
                bail!("{}: scaling policies need a positive threshold", ctx());
            }
            let policy = match t.p.unwrap_or(Param::Auto(crate::config::Auto::Auto)) {
                Param::Auto(_) => MixturePolicy::with_optimal_weights(kind, n, model.alpha()),
                Param::Fixed(p) => MixturePolicy::new(kind, vec![MixWeight::from_p(p); n - 1], n),
            }
            .with_context(ctx)?;
            EstimatorKind::MixtureIs(policy)
        }
    })
}

/// A resolved cell, ready to sample.
pub struct Cell {
    pub label: String,
    pub spec: EstimatorSpec<Model>,
    /// Second-moment reference for `nsm`.
    pub reference: f64,
    /// Stream id for the cell's repetitions.
    pub stream: u64,
}

/// The true value shown in a report and where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    /// Quadrature, `n ≤ 3`.
    Oracle,
    /// `n F̄(b)`.
    Subexponential,
}

/// The oracle when it applies, else `n F̄(b)`.
pub fn reference_value(model: &Model, n: usize, b: f64) -> (f64, ReferenceSource) {
    if n <= 3 {
        if let Ok(r) = exact_tail_prob(model, n, b) {
            if r.value > 0.0 {
                return (r.value, ReferenceSource::Oracle);
            }
        }
    }
    (subexp_reference(model, n, b), ReferenceSource::Subexponential)
}

/// Draws `samples` values on one substream.
pub fn run_repetition(cell: &Cell, samples: usize, root: u64, rep: u64, timing: bool) -> Result<EstimatorResult> {
    let mut rng = substream(root, cell.stream, rep);
    let start = timing.then(Instant::now);
    let mut m = Moments::new();
    for _ in 0..samples {
        m.push(cell.spec.draw(&mut rng)?);
    }
    let wall = start.map_or(0.0, |t| t.elapsed().as_secs_f64());
    Ok(m.finish(cell.reference, wall)?)
}

/// Runs all `(cell, repetition)` tasks on the pool and returns, per cell,
/// the repetition results in order.
pub fn run_cells(
    cells: &[Cell],
    samples: usize,
    repetitions: usize,
    root: u64,
    timing: bool,
    opts: &RunOptions,
) -> Result<Vec<Vec<EstimatorResult>>> {
    let tasks: Vec<(usize, u64)> =
        (0..cells.len()).flat_map(|c| (0..repetitions as u64).map(move |r| (c, r))).collect();
    let work = || -> Result<Vec<EstimatorResult>> {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                run_repetition(&cells[c], samples, root, r, timing)
                    .with_context(|| format!("estimator `{}`, repetition {r}", cells[c].label))
            })
            .collect()
    };
    let flat = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| anyhow!("cannot start worker pool: {e}"))?
            .install(work)?,
        None => work()?,
    };
    let mut out: Vec<Vec<EstimatorResult>> = Vec::with_capacity(cells.len());
    let mut it = flat.into_iter();
    for _ in cells {
        out.push(it.by_ref().take(repetitions).collect());
    }
    Ok(out)
}

/// `nsm` over all `R·N` draws, from the per-repetition values.
pub fn pooled_nsm(reps: &[EstimatorResult]) -> f64 {
    let draws: u64 = reps.iter().map(|r| r.n_samples).sum();
    reps.iter().map(|r| r.nsm * r.n_samples as f64).sum::<f64>() / draws as f64
}

/// One estimator at one `(n, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub estimator: String,
    pub method: String,
    pub n: usize,
    pub b: f64,
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub summary: RepetitionSummary,
    pub reference: f64,
    pub reference_source: ReferenceSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quoted_true_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: ModelSpec,
    pub timing: bool,
    /// Ordered by `n`, then `b`, then estimator as configured.
    pub cells: Vec<CellReport>,
}

impl Report {
    pub fn cell(&self, estimator: &str, n: usize, b: f64) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.estimator == estimator && c.n == n && c.b == b)
    }
}

/// Per-cell values that are reported but not needed for sampling.
#[derive(Debug, Clone, Copy)]
pub struct CellMeta {
    pub quoted: Option<f64>,
    pub source: ReferenceSource,
}

/// Builds every cell of the grid, failing before any sampling on an invalid
/// estimator/model combination.
pub fn build_cells(cfg: &ExperimentConfig) -> Result<(Vec<Cell>, Vec<CellMeta>)> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let (mut cells, mut meta) = (Vec::new(), Vec::new());
    for &n in &cfg.n_values {
        for &b in &cfg.b_values {
            let (reference, source) = reference_value(&model, n, b);
            for t in &cfg.estimators {
                let kind = resolve(t, &model, n, b)?;
                let spec = EstimatorSpec::new(kind, model, n, b)?;
                cells.push(Cell { label: t.label().to_owned(), spec, reference, stream: cell_id(t.label(), n, b) });
                meta.push(CellMeta { quoted: cfg.quoted_value(n, b), source });
            }
        }
    }
    Ok((cells, meta))
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    let (cells, meta) = build_cells(cfg)?;
    let results = run_cells(&cells, cfg.samples, cfg.repetitions, cfg.seed, cfg.timing, opts)?;
    let mut out = Vec::with_capacity(cells.len());
    for ((cell, meta), reps) in cells.into_iter().zip(meta).zip(results) {
        let summary = summarize(&reps, pooled_nsm(&reps))?;
        let mut flags = Vec::new();
        if let Some(q) = meta.quoted {
            if ((q - cell.reference) / cell.reference).abs() > QUOTE_MISMATCH {
                flags.push(format!("quoted true value {q:e} disagrees with reference {:e}", cell.reference));
            }
        }
        out.push(CellReport {
            method: cell.spec.kind().name().to_owned(),
            n: cell.spec.n(),
            b: cell.spec.b(),
            estimator: cell.label,
            samples: cfg.samples,
            repetitions: cfg.repetitions,
            seed: cfg.seed,
            summary,
            reference: cell.reference,
            reference_source: meta.source,
            quoted_true_value: meta.quoted,
            flags,
        });
    }
    Ok(Report { model: cfg.model, timing: cfg.timing, cells: out })
}
