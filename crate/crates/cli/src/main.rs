//! Command-line front end: estimate, baseline, simulate, benchmark.
//!
//! Exit codes: 0 success, 2 non-convergence (partial output written),
//! 3 input/configuration error, 4 degenerate estimator.

mod configs;
mod dataset;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use survbias::{fit_npmle, fit_ple, simgen, EmConfig, Error, Fit, PleFit, Sample};

use configs::{load_json, load_weight, CensorRule, GenConfig};
use dataset::{parse_dataset, write_survival_csv, Dataset, DatasetFormat};

/// Estimation and benchmarking for lifetime data sampled with a known bias.
#[derive(Parser)]
#[command(name = "survbias", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the NPMLE of the lifetime law under a known weight.
    Estimate {
        /// Dataset CSV path.
        #[arg(long)]
        input: PathBuf,
        /// Dataset shape.
        #[arg(long, value_enum)]
        format: DatasetFormat,
        /// Weight configuration: a JSON file path or an inline JSON object.
        #[arg(long)]
        weight: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Iteration cap.
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Sup-norm mass change tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Relative log-likelihood change tolerance.
        #[arg(long, default_value_t = 1e-10)]
        loglik_tol: f64,
        /// Record the per-iteration log-likelihood trace in the fit report.
        #[arg(long)]
        loglik_trace: bool,
    },
    /// Fit the product-limit baseline on left-truncated records.
    Ple {
        #[arg(long)]
        input: PathBuf,
        /// Dataset shape (truncated, or durations for untruncated data).
        #[arg(long, value_enum, default_value_t = DatasetFormat::Truncated)]
        format: DatasetFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a dataset from a sampling-model configuration.
    Simulate {
        /// Generator configuration JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Monte-Carlo estimator comparison.
    Bench {
        /// Benchmark configuration JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    fn input(message: String) -> Self {
        Self { message, code: 3 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) => 4,
            _ => 3,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Estimate {
            input,
            format,
            weight,
            out,
            max_iter,
            tol,
            loglik_tol,
            loglik_trace,
        } => cmd_estimate(
            &input,
            format,
            &weight,
            &out,
            max_iter,
            tol,
            loglik_tol,
            loglik_trace,
        ),
        Command::Ple { input, format, out } => cmd_ple(&input, format, &out),
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
        Command::Bench {
            config,
            out,
            workers,
        } => cmd_bench(&config, &out, workers),
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    estimator: &'static str,
    #[serde(flatten)]
    fit: &'a Fit,
}

#[derive(Serialize)]
struct PleReport<'a> {
    estimator: &'static str,
    #[serde(flatten)]
    fit: &'a PleFit,
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    input: &Path,
    format: DatasetFormat,
    weight: &str,
    out: &Path,
    max_iter: usize,
    tol: f64,
    loglik_tol: f64,
    loglik_trace: bool,
) -> Result<u8, CliError> {
    let base_dir = input.parent().map(Path::to_path_buf).unwrap_or_default();
    let (weight_config, weight_spec) = load_weight(weight, &base_dir)?;
    let dataset = parse_dataset(input, format)?;
    let sample: Sample = dataset.to_sample()?;
    let cfg = EmConfig {
        max_iter,
        mass_tol: tol,
        loglik_tol,
        record_trace: loglik_trace,
        ..EmConfig::default()
    };

    std::fs::create_dir_all(out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;
    write_json(
        &out.join("resolved_config.json"),
        &serde_json::json!({
            "command": "estimate",
            "input": input.display().to_string(),
            "format": format.to_string(),
            "weight_config": weight_config,
            "weight_resolved": weight_spec,
            "em": { "max_iter": max_iter, "mass_tol": tol, "loglik_tol": loglik_tol },
        }),
    )?;

    let fit = fit_npmle(&sample, &weight_spec, &cfg)?;
    write_json(
        &out.join("fit.json"),
        &FitReport {
            estimator: "npmle",
            fit: &fit,
        },
    )?;
    write_survival_csv(&out.join("survival.csv"), fit.pi.points(), |t| {
        fit.survival_at(t)
    })?;

    if let Some(boundary) = fit.conditional_above {
        eprintln!(
            "note: the weight vanishes on (0, {boundary}]; the estimate is the lifetime law \
             conditional on exceeding {boundary}"
        );
    }
    if !fit.converged {
        eprintln!(
            "warning: EM did not converge within {max_iter} iterations; partial output written"
        );
        return Ok(2);
    }
    Ok(0)
}

fn cmd_ple(input: &Path, format: DatasetFormat, out: &Path) -> Result<u8, CliError> {
    let dataset = parse_dataset(input, format)?;
    let records = match dataset {
        Dataset::Truncated(recs) => recs,
        Dataset::Durations(obs) => obs
            .iter()
            .map(|o| {
                survbias::TruncatedRecord::new(
                    0.0,
                    o.value,
                    o.kind == survbias::ObservationKind::Exact,
                )
                .map_err(CliError::from)
            })
            .collect::<Result<Vec<_>, _>>()?,
        Dataset::AgeResidual(_) => {
            return Err(CliError::input(
                "the product-limit baseline needs truncated or durations input".into(),
            ))
        }
    };

    std::fs::create_dir_all(out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;
    write_json(
        &out.join("resolved_config.json"),
        &serde_json::json!({
            "command": "ple",
            "input": input.display().to_string(),
            "format": format.to_string(),
        }),
    )?;

    let fit = fit_ple(&records)?;
    write_json(
        &out.join("ple.json"),
        &PleReport {
            estimator: "ple",
            fit: &fit,
        },
    )?;
    write_survival_csv(&out.join("survival.csv"), fit.distribution.points(), |t| {
        fit.survival_at(t)
    })?;

    if !fit.defined {
        eprintln!(
            "warning: the risk group empties before the last event; the product-limit estimate \
             is degenerate beyond that point"
        );
        return Ok(4);
    }
    Ok(0)
}

fn cmd_simulate(
    config_path: &Path,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<u8, CliError> {
    let mut config: GenConfig = load_json(config_path)?;
    if let Some(seed) = seed_override {
        match &mut config {
            GenConfig::LeftTruncated { seed: s, .. }
            | GenConfig::CrossSectional { seed: s, .. }
            | GenConfig::Multiplicative { seed: s, .. } => *s = seed,
        }
    }
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;

    let dataset_path = out.join("dataset.csv");
    let (report, resolved) = match &config {
        GenConfig::LeftTruncated {
            g,
            w,
            censor,
            n,
            seed,
            stream,
        } => {
            let constant = match censor {
                CensorRule::Constant(c) => *c,
                CensorRule::Target(target) => {
                    simgen::solve_censor_constant(g, w, *target, *seed, u64::MAX)?
                }
            };
            let (records, report) = simgen::gen_left_truncated(g, w, constant, *n, *seed, *stream)?;
            write_rows(
                &dataset_path,
                &["entry", "exit", "status"],
                records
                    .iter()
                    .map(|r| vec![r.entry, r.exit, f64::from(u8::from(r.event))]),
            )?;
            (
                report,
                serde_json::json!({ "config": config, "censor_constant": constant }),
            )
        }
        GenConfig::CrossSectional {
            g,
            w,
            followup,
            n,
            seed,
            stream,
        } => {
            let (_, spec) = load_weight(&serde_json::to_string(w).unwrap(), Path::new("."))?;
            let (records, report) =
                simgen::gen_cross_sectional(g, &spec, *followup, *n, *seed, *stream)?;
            write_rows(
                &dataset_path,
                &["age", "residual", "status"],
                records
                    .iter()
                    .map(|r| vec![r.age, r.residual, f64::from(u8::from(r.event))]),
            )?;
            (report, serde_json::json!({ "config": config }))
        }
        GenConfig::Multiplicative {
            g0,
            w,
            m,
            n,
            seed,
            stream,
        } => {
            let (_, spec) = load_weight(&serde_json::to_string(w).unwrap(), Path::new("."))?;
            let (sample, report) = simgen::gen_multiplicative(g0, &spec, *m, *n, *seed, *stream)?;
            write_rows(
                &dataset_path,
                &["value", "status"],
                sample
                    .exact
                    .iter()
                    .map(|v| vec![*v, 1.0])
                    .chain(sample.reduced.iter().map(|v| vec![*v, 0.0])),
            )?;
            (report, serde_json::json!({ "config": config }))
        }
    };
    write_json(&out.join("gen_report.json"), &report)?;
    write_json(&out.join("resolved_config.json"), &resolved)?;
    Ok(0)
}

fn cmd_bench(config_path: &Path, out: &Path, workers: Option<usize>) -> Result<u8, CliError> {
    let config: survbias::bench::BenchConfig = load_json(config_path)?;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;

    let report = match workers {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::input(format!("worker pool: {e}")))?;
            pool.install(|| survbias::bench::run_comparison(&config))?
        }
        None => survbias::bench::run_comparison(&config)?,
    };

    write_json(
        &out.join("resolved_config.json"),
        &serde_json::json!({
            "command": "bench",
            "config": config,
            "workers": workers,
        }),
    )?;
    write_json(&out.join("bench_report.json"), &report)?;

    let csv_path = out.join("bench_report.csv");
    let mut w = csv::Writer::from_path(&csv_path)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", csv_path.display())))?;
    w.write_record(["censor_level", "n", "decile", "estimator", "mse", "log_mse"])
        .map_err(|e| CliError::input(e.to_string()))?;
    for (level, n, decile, estimator, mse, log_mse) in report.long_rows() {
        w.write_record([
            format!("{level}"),
            format!("{n}"),
            format!("{decile}"),
            estimator.to_string(),
            format!("{mse}"),
            format!("{log_mse}"),
        ])
        .map_err(|e| CliError::input(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::input(e.to_string()))?;
    Ok(0)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn write_rows(
    path: &Path,
    headers: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(headers)
        .map_err(|e| CliError::input(e.to_string()))?;
    for row in rows {
        let fields: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if i + 1 == headers.len() {
                    format!("{}", *v as i64) // status column
                } else {
                    format!("{v}")
                }
            })
            .collect();
        w.write_record(&fields)
            .map_err(|e| CliError::input(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::input(e.to_string()))?;
    Ok(())
}
