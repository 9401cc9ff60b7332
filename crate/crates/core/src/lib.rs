//! Nonparametric estimation of a lifetime distribution from observations
//! subject to a known sampling bias and right censoring.
//!
//! The sampling bias is a known non-negative, non-decreasing, right
//! continuous function `W`: a subject with lifetime `x` enters the sample
//! with probability proportional to `W(x)`. Exact and censored durations
//! contribute `dG(x)/mu*` and `(1 - G(y))/mu*` factors with
//! `mu* = ∫ W dG`. The maximizing distribution is found by an EM iteration
//! on a finite support determined from the observations ([`em`], [`support`]).
//!
//! The crate also ships the product-limit estimator for left-truncated,
//! censored records ([`ple`]), which needs no knowledge of the bias and
//! serves as the comparison baseline; seedable generators for censored,
//! cross-sectional, and multiplicative-reduction samples ([`simgen`]); and a
//! Monte-Carlo harness comparing the two estimators by decile MSE
//! ([`bench`]).

pub mod bench;
pub mod data;
pub mod discrete;
pub mod em;
pub mod error;
pub mod families;
pub mod ple;
pub mod simgen;
pub mod stats;
pub mod support;
pub mod weight;

pub use data::{AgeResidualRecord, Observation, ObservationKind, Sample, TruncatedRecord};
pub use discrete::DiscreteDistribution;
pub use em::{
    em_step, em_step_direct, estimate_from_age_residual, fit_npmle, fit_on_support,
    invert_weighted, loglik, EmConfig, Fit, Init,
};
pub use error::{Error, Result};
pub use families::DistSpec;
pub use ple::{fit_ple, ple_defined, PleFit};
pub use support::{
    critical_points, critical_points_multiplicative, full_support, reduce_support,
    reduce_support_multiplicative, Exclusion, ExclusionRule, SupportSet,
};
pub use weight::{build_weight, Interpolation, WeightConfig, WeightSpec};
