use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use htis::config::{self, Format, ModelSpec, Param};
use htis::report;
use htis::{run_efficiency_sweep, run_experiment, ExperimentConfig, RunOptions, SweepConfig};
use htis_core::analysis::{condmix_min, optimize_lambda, BoundReport, LAMBDA_RANGE};
use htis_core::policy::{optimal_mix_weights, PolicyKind};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "htis", version, about = "Tail probabilities of heavy-tailed random walks by simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an estimator × (n, b) grid.
    Run {
        #[command(flatten)]
        common: Common,
        /// Keep only these estimator labels (repeatable).
        #[arg(long = "estimator", short = 'e', value_name = "LABEL")]
        estimators: Vec<String>,
        /// Report zero wall time, making output byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Normalized second moment over a threshold grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "estimator", short = 'e', value_name = "LABEL")]
        estimators: Vec<String>,
    },
    /// Asymptotic second-moment bounds of the mixture policies.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Common {
    /// TOML config, or JSON with a `.json` extension.
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, short = 'j')]
    workers: Option<usize>,
    #[arg(long, short = 'f', value_enum)]
    format: Option<Format>,
    /// Output file; `-` for standard output.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.999)]
    a: f64,
    /// A number or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_param)]
    lambda: Param,
    #[arg(long, default_value_t = 0.5)]
    u: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Use the two-sided model.
    #[arg(long)]
    symmetric: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

fn parse_param(s: &str) -> Result<Param, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Param::Auto(config::Auto::Auto));
    }
    s.parse().map(Param::Fixed).map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    model: ModelSpec,
    condmix_closed_form: f64,
    lambda_optimum: Option<htis_core::analysis::LambdaOptimum>,
    reports: Vec<BoundReport>,
}

fn bounds(args: &BoundsArgs) -> Result<String> {
    let spec = if args.symmetric {
        ModelSpec::SymmetricPareto { alpha: args.alpha }
    } else {
        ModelSpec::Pareto { alpha: args.alpha }
    };
    let model = spec.build()?;
    anyhow::ensure!(args.n >= 1, "n must be at least 1");
    let optimum = match args.lambda {
        Param::Auto(_) => Some(optimize_lambda(&model, LAMBDA_RANGE.0, LAMBDA_RANGE.1)?),
        Param::Fixed(_) => None,
    };
    let lambda = args.lambda.fixed().or(optimum.map(|o| o.lambda)).expect("one of the two is set");
    let a = args.a;
    let kinds = [
        PolicyKind::Conditional { a },
        PolicyKind::Gpd { a },
        PolicyKind::ScalingI { lambda, a },
        PolicyKind::ScalingII { lambda, u: args.u, delta: args.delta, a },
    ];
    let reports = kinds
        .iter()
        .map(|k| BoundReport::for_policy(*k, &model, &optimal_mix_weights(k, args.n, args.alpha), args.n))
        .collect::<htis_core::Result<Vec<_>>>()?;
    let out = BoundsOutput {
        model: spec,
        condmix_closed_form: condmix_min(args.n, args.alpha, a),
        lambda_optimum: optimum,
        reports,
    };
    if args.format == Format::Json {
        return Ok(serde_json::to_string_pretty(&out)? + "\n");
    }
    let mut s = format!("n = {}, alpha = {}, a = {a}, lambda = {lambda}\n", args.n, args.alpha);
    if let Some(o) = optimum {
        s += &format!(
            "lambda* = {:.9} with factor {:.12}{}\n",
            o.lambda,
            o.factor,
            if o.unimodal { "" } else { " (scan not unimodal)" }
        );
    }
    s += &format!("conditional closed form n^-2[(n-1)a^(-alpha/2)+1]^2 = {:.12}\n", out.condmix_closed_form);
    for r in &out.reports {
        s += &format!("{:<12} bound {:.12}\n", r.kind.name(), r.bound_value);
    }
    Ok(s)
}

fn real_main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { common, estimators, no_timing } => {
            let mut cfg: ExperimentConfig = config::load(&common.config)?;
            cfg.retain_estimators(&estimators)?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if no_timing {
                cfg.timing = false;
            }
            let format = common.format.unwrap_or(cfg.output.format);
            let path = common.output.or(cfg.output.path.clone());
            let report = run_experiment(&cfg, &RunOptions { workers: common.workers })?;
            emit(&report::render(&report, format)?, path.as_deref())
        }
        Command::Sweep { common, estimators } => {
            let mut cfg: SweepConfig = config::load(&common.config)?;
            if !estimators.is_empty() {
                for l in &estimators {
                    anyhow::ensure!(cfg.estimators.iter().any(|e| e.label() == l), "no estimator labelled `{l}`");
                }
                cfg.estimators.retain(|e| estimators.iter().any(|l| l == e.label()));
            }
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            let format = common.format.unwrap_or(cfg.output.format);
            let path = common.output.or(cfg.output.path.clone());
            let report = run_efficiency_sweep(&cfg, &RunOptions { workers: common.workers })?;
            emit(&report::render_sweep(&report, format)?, path.as_deref())
        }
        Command::Bounds(args) => emit(&bounds(&args)?, None),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
