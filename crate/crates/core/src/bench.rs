//! Monte-Carlo comparison of the NPMLE against the product-limit estimator
//! under the left-truncation model: mean squared error of the estimated CDF
//! at the deciles of the true lifetime law, across censoring levels and
//! sample sizes.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Sample, TruncatedRecord};
use crate::discrete::DiscreteDistribution;
use crate::em::{fit_npmle, EmConfig};
use crate::error::{Error, Result};
use crate::families::DistSpec;
use crate::ple::fit_ple;
use crate::simgen::{gen_left_truncated, solve_censor_constant, RNG_NAME};
use crate::weight::{build_weight, WeightConfig, WeightSpec};

/// Floor applied before taking logs of MSE values.
pub const LOG_MSE_FLOOR: f64 = 1e-12;

/// Stream id used by the censoring-constant solver within each level.
const SOLVER_STREAM_TAG: u64 = u64::MAX;

/// Experiment design: truth, assumed bias, sizes, censoring levels, seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub true_g: DistSpec,
    pub true_w: DistSpec,
    pub assumed_w: WeightConfig,
    pub n_per_dataset: usize,
    pub replicates: usize,
    pub censor_targets: Vec<f64>,
    /// Merge this many consecutive datasets into a larger-sample arm
    /// (1 disables the combined arm).
    #[serde(default = "default_combine")]
    pub combine_factor: usize,
    pub seed: u64,
    /// Iteration cap for each NPMLE fit.
    #[serde(default = "default_max_iter")]
    pub em_max_iter: usize,
}

fn default_combine() -> usize {
    1
}

fn default_max_iter() -> usize {
    100_000
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        self.true_g.validate()?;
        self.true_w.validate()?;
        if self.replicates == 0 || self.n_per_dataset == 0 {
            return Err(Error::Config(
                "replicates and n_per_dataset must be positive".into(),
            ));
        }
        if self.censor_targets.is_empty()
            || self
                .censor_targets
                .iter()
                .any(|t| !(0.0..1.0).contains(t) || *t <= 0.0)
        {
            return Err(Error::Config("censor targets must lie in (0, 1)".into()));
        }
        if self.combine_factor == 0 {
            return Err(Error::Config("combine_factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// Results for one estimator within an arm.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorMse {
    /// Raw MSE at the nine deciles of the true law.
    pub mse: Vec<f64>,
    /// `ln(max(mse, floor))`, derived for plotting.
    pub log_mse: Vec<f64>,
    /// Number of replicates that entered the average.
    pub included: usize,
}

/// Results for one (censoring level, sample size) cell.
#[derive(Debug, Clone, Serialize)]
pub struct ArmReport {
    pub n: usize,
    pub datasets: usize,
    pub npmle: EstimatorMse,
    /// Absent when the product-limit estimator was undefined on every dataset.
    pub ple: Option<EstimatorMse>,
    pub ple_undefined: usize,
    pub ple_undefined_fraction: f64,
    /// Per-decile `1 - mse_npmle / mse_ple` where the PLE average exists.
    pub improvement: Option<Vec<f64>>,
    pub mean_improvement: Option<f64>,
    /// Replicates that failed with an estimation error, with messages.
    pub failures: Vec<String>,
    pub runtime_secs: f64,
}

/// Results for one censoring level.
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub censor_target: f64,
    pub censor_constant: f64,
    pub arms: Vec<ArmReport>,
}

/// The full experiment output.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rng: &'static str,
    pub levels: Vec<LevelReport>,
    pub runtime_secs: f64,
}

impl BenchReport {
    /// Long-format rows `(censor_level, n, decile, estimator, mse, log_mse)`
    /// for external plotting.
    pub fn long_rows(&self) -> Vec<(f64, usize, usize, &'static str, f64, f64)> {
        let mut rows = Vec::new();
        for level in &self.levels {
            for arm in &level.arms {
                for (k, mse) in arm.npmle.mse.iter().enumerate() {
                    rows.push((
                        level.censor_target,
                        arm.n,
                        k + 1,
                        "npmle",
                        *mse,
                        arm.npmle.log_mse[k],
                    ));
                }
                if let Some(ple) = &arm.ple {
                    for (k, mse) in ple.mse.iter().enumerate() {
                        rows.push((
                            level.censor_target,
                            arm.n,
                            k + 1,
                            "ple",
                            *mse,
                            ple.log_mse[k],
                        ));
                    }
                }
            }
        }
        rows
    }
}

/// Mean squared error of fitted CDFs at the nine deciles of the true law.
pub fn mse_at_deciles(fits: &[DiscreteDistribution], true_g: &DistSpec) -> [f64; 9] {
    let mut out = [0.0; 9];
    if fits.is_empty() {
        return out;
    }
    for (k, slot) in out.iter_mut().enumerate() {
        let level = (k + 1) as f64 / 10.0;
        let q = true_g.quantile(level);
        let sum: f64 = fits.iter().map(|f| (f.cdf(q) - level).powi(2)).sum();
        *slot = sum / fits.len() as f64;
    }
    out
}

/// Run the full comparison described by the configuration.
pub fn run_comparison(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let assumed = build_weight(&cfg.assumed_w)?;
    let started = Instant::now();
    let mut levels = Vec::with_capacity(cfg.censor_targets.len());
    for (level_idx, target) in cfg.censor_targets.iter().enumerate() {
        levels.push(run_level(cfg, &assumed, level_idx, *target)?);
    }
    Ok(BenchReport {
        config: cfg.clone(),
        rng: RNG_NAME,
        levels,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

fn run_level(
    cfg: &BenchConfig,
    assumed: &WeightSpec,
    level_idx: usize,
    target: f64,
) -> Result<LevelReport> {
    let level_tag = (level_idx as u64) << 32;
    let censor_constant = solve_censor_constant(
        &cfg.true_g,
        &cfg.true_w,
        target,
        cfg.seed,
        level_tag | SOLVER_STREAM_TAG,
    )?;

    let datasets: Vec<Result<Vec<TruncatedRecord>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            gen_left_truncated(
                &cfg.true_g,
                &cfg.true_w,
                censor_constant,
                cfg.n_per_dataset,
                cfg.seed,
                level_tag | r as u64,
            )
            .map(|(records, _)| records)
        })
        .collect();
    let mut records = Vec::with_capacity(cfg.replicates);
    for d in datasets {
        records.push(d?);
    }

    let mut arms = vec![run_arm(cfg, assumed, &records)?];
    if cfg.combine_factor > 1 && cfg.replicates >= cfg.combine_factor {
        let combined: Vec<Vec<TruncatedRecord>> = records
            .chunks_exact(cfg.combine_factor)
            .map(|block| block.iter().flatten().copied().collect())
            .collect();
        arms.push(run_arm(cfg, assumed, &combined)?);
    }

    Ok(LevelReport {
        censor_target: target,
        censor_constant,
        arms,
    })
}

fn run_arm(
    cfg: &BenchConfig,
    assumed: &WeightSpec,
    datasets: &[Vec<TruncatedRecord>],
) -> Result<ArmReport> {
    let started = Instant::now();
    let em_cfg = EmConfig {
        max_iter: cfg.em_max_iter,
        ..EmConfig::default()
    };

    struct Outcome {
        npmle: Option<DiscreteDistribution>,
        ple: Option<DiscreteDistribution>,
        ple_undefined: bool,
        failure: Option<String>,
    }

    let outcomes: Vec<Outcome> = datasets
        .par_iter()
        .map(|records| {
            let npmle = Sample::from_truncated(records)
                .and_then(|sample| fit_npmle(&sample, assumed, &em_cfg))
                .map(|fit| fit.pi);
            let ple = fit_ple(records);
            match (npmle, ple) {
                (Ok(npmle), Ok(ple)) => Outcome {
                    npmle: Some(npmle),
                    ple_undefined: !ple.defined,
                    ple: ple.defined.then_some(ple.distribution),
                    failure: None,
                },
                (npmle, ple) => {
                    let mut messages = Vec::new();
                    let npmle = match npmle {
                        Ok(d) => Some(d),
                        Err(e) => {
                            messages.push(format!("npmle: {e}"));
                            None
                        }
                    };
                    let (ple_dist, undefined) = match ple {
                        Ok(p) => (p.defined.then_some(p.distribution), !p.defined),
                        Err(e) => {
                            messages.push(format!("ple: {e}"));
                            (None, true)
                        }
                    };
                    Outcome {
                        npmle,
                        ple: ple_dist,
                        ple_undefined: undefined,
                        failure: Some(messages.join("; ")),
                    }
                }
            }
        })
        .collect();

    let npmle_fits: Vec<DiscreteDistribution> =
        outcomes.iter().filter_map(|o| o.npmle.clone()).collect();
    let ple_fits: Vec<DiscreteDistribution> =
        outcomes.iter().filter_map(|o| o.ple.clone()).collect();
    let ple_undefined = outcomes.iter().filter(|o| o.ple_undefined).count();
    let failures: Vec<String> = outcomes
        .iter()
        .filter_map(|o| o.failure.clone())
        .take(32)
        .collect();

    let npmle_mse = mse_at_deciles(&npmle_fits, &cfg.true_g);
    let npmle = EstimatorMse {
        mse: npmle_mse.to_vec(),
        log_mse: npmle_mse
            .iter()
            .map(|m| m.max(LOG_MSE_FLOOR).ln())
            .collect(),
        included: npmle_fits.len(),
    };
    let ple = (!ple_fits.is_empty()).then(|| {
        let mse = mse_at_deciles(&ple_fits, &cfg.true_g);
        EstimatorMse {
            mse: mse.to_vec(),
            log_mse: mse.iter().map(|m| m.max(LOG_MSE_FLOOR).ln()).collect(),
            included: ple_fits.len(),
        }
    });
    let improvement: Option<Vec<f64>> = ple.as_ref().map(|p| {
        npmle
            .mse
            .iter()
            .zip(&p.mse)
            .map(|(a, b)| 1.0 - a / b)
            .collect()
    });
    let mean_improvement = improvement
        .as_ref()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64);

    Ok(ArmReport {
        n: datasets.first().map_or(0, Vec::len),
        datasets: datasets.len(),
        npmle,
        ple,
        ple_undefined,
        ple_undefined_fraction: ple_undefined as f64 / datasets.len() as f64,
        improvement,
        mean_improvement,
        failures,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}
