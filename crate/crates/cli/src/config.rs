//! Experiment descriptions, read from TOML or JSON.
//!
//! Estimators are flat key-value tables. Parameters that admit a computed
//! value (`a`, `lambda`, `p`) accept either a number or the string `"auto"`.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use htis_core::dist::{Pareto, SymmetricPareto, TailModel};
use htis_core::estimators::AbSum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `F̄(x) = (1+x)^(-α)` on `[0, ∞)`.
    Pareto { alpha: f64 },
    /// The same tail on both sides of zero, half the mass each.
    SymmetricPareto { alpha: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        Ok(match *self {
            ModelSpec::Pareto { alpha } => Model::Pareto(Pareto::new(alpha)?),
            ModelSpec::SymmetricPareto { alpha } => Model::Symmetric(SymmetricPareto::new(alpha)?),
        })
    }

    pub fn positive_support(&self) -> bool {
        matches!(self, ModelSpec::Pareto { .. })
    }
}

/// A built increment law.
#[derive(Debug, Clone, Copy)]
pub enum Model {
    Pareto(Pareto),
    Symmetric(SymmetricPareto),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Pareto($m) => $e,
            Model::Symmetric($m) => $e,
        }
    };
}

impl TailModel for Model {
    fn alpha(&self) -> f64 {
        delegate!(self, m => m.alpha())
    }
    fn ln_density(&self, x: f64) -> f64 {
        delegate!(self, m => m.ln_density(x))
    }
    fn ln_tail(&self, x: f64) -> f64 {
        delegate!(self, m => m.ln_tail(x))
    }
    fn quantile(&self, u: f64) -> f64 {
        delegate!(self, m => m.quantile(u))
    }
    fn support_lower(&self) -> f64 {
        delegate!(self, m => m.support_lower())
    }
    fn inv_ln_tail(&self, lt: f64) -> f64 {
        delegate!(self, m => m.inv_ln_tail(lt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Auto {
    Auto,
}

/// A number, or `"auto"` for the value the library can compute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Fixed(f64),
    Auto(Auto),
}

impl Param {
    pub fn fixed(self) -> Option<f64> {
        match self {
            Param::Fixed(v) => Some(v),
            Param::Auto(_) => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Fixed(v) => write!(f, "{v}"),
            Param::Auto(_) => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Crude Monte Carlo.
    Mc,
    /// Conditioning on the order statistics.
    Ab,
    /// Conditioning on the maximum (`n F̄(max(M, b - S))`).
    Ak,
    /// Exponential twist of the hazard function.
    Hazard,
    Conditional,
    Gpd,
    ScalingI,
    ScalingII,
}

impl Method {
    pub fn is_mixture(self) -> bool {
        matches!(self, Method::Conditional | Method::Gpd | Method::ScalingI | Method::ScalingII)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Ab => "ab",
            Method::Ak => "ak",
            Method::Hazard => "hazard",
            Method::Conditional => "conditional",
            Method::Gpd => "gpd",
            Method::ScalingI => "scaling_i",
            Method::ScalingII => "scaling_ii",
        }
    }
}

/// One estimator column. Which keys are allowed depends on `method`; see
/// [`EstimatorTemplate::check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorTemplate {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Param>,
    /// `δ` of the `a_b` schedule when `a = "auto"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Plain-draw probability, the same at every step, or `"auto"` (default)
    /// for the bound-minimising weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<AbSum>,
}

impl EstimatorTemplate {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            label: None,
            a: None,
            schedule_delta: None,
            lambda: None,
            u: None,
            delta: None,
            p: None,
            theta: None,
            order: None,
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.method.name())
    }

    /// Rejects missing and stray keys.
    pub fn check(&self) -> Result<()> {
        let m = self.method;
        let name = self.label();
        let allowed = |key: &str, present: bool, ok: bool| -> Result<()> {
            ensure!(!present || ok, "estimator `{name}`: `{key}` does not apply to method `{}`", m.name());
            Ok(())
        };
        let needs = |key: &str, present: bool| -> Result<()> {
            ensure!(present, "estimator `{name}`: method `{}` needs `{key}`", m.name());
            Ok(())
        };
        let scaling = matches!(m, Method::ScalingI | Method::ScalingII);
        allowed("a", self.a.is_some(), m.is_mixture())?;
        allowed("p", self.p.is_some(), m.is_mixture())?;
        allowed("lambda", self.lambda.is_some(), scaling)?;
        allowed("u", self.u.is_some(), m == Method::ScalingII)?;
        allowed("delta", self.delta.is_some(), m == Method::ScalingII)?;
        allowed("theta", self.theta.is_some(), m == Method::Hazard)?;
        allowed("order", self.order.is_some(), m == Method::Ab)?;
        allowed("schedule_delta", self.schedule_delta.is_some(), matches!(self.a, Some(Param::Auto(_))))?;
        if m.is_mixture() {
            needs("a", self.a.is_some())?;
        }
        if scaling {
            needs("lambda", self.lambda.is_some())?;
        }
        if m == Method::ScalingII {
            needs("u", self.u.is_some())?;
            needs("delta", self.delta.is_some())?;
        }
        if m == Method::Hazard {
            needs("theta", self.theta.is_some())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// A true value quoted from an external source, shown next to the computed
/// reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotedValue {
    pub n: usize,
    pub b: f64,
    pub value: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n_values: Vec<usize>,
    pub b_values: Vec<f64>,
    /// `N`, draws per estimate.
    pub samples: usize,
    /// `R`, estimates per cell.
    pub repetitions: usize,
    pub seed: u64,
    /// Record wall time per repetition. Off gives byte-reproducible output.
    #[serde(default = "yes")]
    pub timing: bool,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quoted: Vec<QuotedValue>,
    pub estimators: Vec<EstimatorTemplate>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        ensure!(self.samples >= 2, "samples must be at least 2, got {}", self.samples);
        ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        ensure!(!self.n_values.is_empty(), "n_values is empty");
        ensure!(!self.b_values.is_empty(), "b_values is empty");
        ensure!(!self.estimators.is_empty(), "no estimators configured");
        for &n in &self.n_values {
            ensure!(n >= 1, "walk length must be at least 1");
        }
        for &b in &self.b_values {
            ensure!(b.is_finite(), "threshold {b} is not finite");
            if self.model.positive_support() {
                ensure!(b > 0.0, "threshold {b} must be positive for a positive-support model");
            }
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.estimators {
            e.check()?;
            ensure!(seen.insert(e.label()), "duplicate estimator label `{}`", e.label());
        }
        Ok(())
    }

    /// Keeps only estimators whose label is in `labels`; an empty list keeps
    /// all.
    pub fn retain_estimators(&mut self, labels: &[String]) -> Result<()> {
        if labels.is_empty() {
            return Ok(());
        }
        for l in labels {
            if !self.estimators.iter().any(|e| e.label() == l) {
                bail!("no estimator labelled `{l}`");
            }
        }
        self.estimators.retain(|e| labels.iter().any(|l| l == e.label()));
        Ok(())
    }

    pub fn quoted_value(&self, n: usize, b: f64) -> Option<f64> {
        self.quoted.iter().find(|q| q.n == n && q.b == b).map(|q| q.value)
    }
}

/// Parses TOML, or JSON when the extension is `.json`.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, json: bool) -> Result<T> {
    if json {
        serde_json::from_str(text).context("invalid JSON config")
    } else {
        toml::from_str(text).context("invalid TOML config")
    }
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse(&text, json).with_context(|| format!("in {}", path.display()))
}
