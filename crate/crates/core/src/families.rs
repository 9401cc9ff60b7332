//! Parametric lifetime families used by the generators and the benchmark
//! harness: exponential, gamma, and uniform, with analytic CDF/quantile
//! access and seeded sampling.

use rand::Rng;
use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::{Error, Result};

/// A parametric distribution on the positive half line (or an interval).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum DistSpec {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl DistSpec {
    /// Check parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistSpec::Exponential { rate } => rate.is_finite() && rate > 0.0,
            DistSpec::Gamma { shape, rate } => {
                shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0
            }
            DistSpec::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid distribution parameters: {self:?}"
            )))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            DistSpec::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    statrs::distribution::Gamma::new(shape, rate)
                        .expect("validated parameters")
                        .cdf(x)
                }
            }
            DistSpec::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Quantile function; `p` must lie in [0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&p));
        match *self {
            DistSpec::Exponential { rate } => -(-p).ln_1p() / rate,
            DistSpec::Gamma { shape, rate } => statrs::distribution::Gamma::new(shape, rate)
                .expect("validated parameters")
                .inverse_cdf(p),
            DistSpec::Uniform { lo, hi } => lo + p * (hi - lo),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistSpec::Exponential { rate } => rand_distr::Exp::new(rate)
                .expect("validated parameters")
                .sample(rng),
            DistSpec::Gamma { shape, rate } => rand_distr::Gamma::new(shape, 1.0 / rate)
                .expect("validated parameters")
                .sample(rng),
            DistSpec::Uniform { lo, hi } => lo + rng.random::<f64>() * (hi - lo),
        }
    }
}
