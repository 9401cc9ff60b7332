//! The NPMLE engine.
//!
//! Estimation runs in two coordinate systems. The weighted law puts mass
//! `p_j` at support point `t_j`; the discrete likelihood is
//!
//! ```text
//!   L(p) = prod_j p_j^{xi_j} * ( sum_{k >= j} p_k / W(t_k) )^{zeta_j}
//! ```
//!
//! with `xi_j` exact and `zeta_j` censored multiplicities. One EM sweep
//! redistributes each censored observation's mass over the points at or
//! above it and re-estimates the weighted law:
//!
//! ```text
//!   p_j' = (n + m)^{-1} ( xi_j
//!          + p_j / W(t_j) * sum_{k <= j} zeta_k / sum_{l >= k} p_l / W(t_l) )
//! ```
//!
//! The unbiased law follows by the inversion `pi_j ∝ p_j / W(t_j)`. The same
//! sweep can be written directly in unbiased coordinates (see
//! [`em_step_direct`]); the two agree under the substitution
//! `pi_j ∝ p_j / W(t_j)` and the direct form exists as a cross-check only.
//!
//! The iteration never decreases the likelihood, and with every support point
//! carrying positive limit mass it converges to the unique maximizer. At
//! boundary solutions the masses converge sublinearly while the likelihood
//! plateaus, which is why the stopping rule watches both.

use serde::Serialize;

use crate::data::{AgeResidualRecord, Sample};
use crate::discrete::{kahan_suffix_sums, kahan_sum, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::support::{reduce_support, Exclusion, ExclusionRule, SupportSet};
use crate::weight::WeightSpec;

/// How to initialize the weighted masses.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Uniform over the support; strictly positive, so the convergence
    /// guarantees apply and runs are deterministic.
    Uniform,
    /// Explicit starting masses on the reduced support.
    Custom(Vec<f64>),
}

/// Stopping control for the EM iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    /// Iteration cap.
    pub max_iter: usize,
    /// Stop when the sup-norm change of the mass vector falls to this.
    pub mass_tol: f64,
    /// Stop when the relative log-likelihood change falls to this.
    pub loglik_tol: f64,
    pub init: Init,
    /// Record the log-likelihood after every iteration.
    pub record_trace: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            mass_tol: 1e-8,
            loglik_tol: 1e-10,
            init: Init::Uniform,
            record_trace: false,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        let tolerances_ok = self.mass_tol > 0.0 && self.loglik_tol > 0.0; // rejects NaN
        if !tolerances_ok {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// A fitted estimate: the weighted law `p`, the unbiased law `pi`, and
/// convergence diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Fit {
    pub support: SupportSet,
    /// Weighted law (the law of a sampled lifetime).
    pub p: DiscreteDistribution,
    /// Unbiased law (the estimand).
    pub pi: DiscreteDistribution,
    /// Log of the discrete likelihood at `p`.
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Estimated normalizer `sum_j W(t_j) pi_j`.
    pub mu_star: f64,
    /// When the weight vanishes below this point, `pi` estimates the lifetime
    /// law conditional on exceeding it.
    pub conditional_above: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loglik_trace: Option<Vec<f64>>,
}

impl Fit {
    /// Estimated survival `1 - G(t)` of the unbiased law.
    pub fn survival_at(&self, t: f64) -> f64 {
        self.pi.survival(t)
    }
}

/// Log-likelihood of a mass vector on a support set.
///
/// Returns `-inf` when a required factor vanishes. Errors when the weight is
/// zero at a support point: such points cannot carry weighted mass and must
/// be removed before evaluation (see [`fit_on_support`]).
pub fn loglik(support: &SupportSet, w: &WeightSpec, p: &DiscreteDistribution) -> Result<f64> {
    let problem = Problem::build(support, w)?;
    check_points_match(support, p)?;
    Ok(problem.loglik(p.masses(), &mut Vec::new()))
}

/// One EM sweep in weighted coordinates.
pub fn em_step(
    support: &SupportSet,
    w: &WeightSpec,
    p_old: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    let problem = Problem::build(support, w)?;
    check_points_match(support, p_old)?;
    let mut out = vec![0.0; p_old.len()];
    problem.step(p_old.masses(), &mut out, &mut Vec::new())?;
    DiscreteDistribution::new(support.points().to_vec(), out)
}

/// One EM sweep in unbiased coordinates; returns the updated weighted law.
///
/// Cross-check only: with `pi_j ∝ p_j / W(t_j)` this reproduces [`em_step`]
/// exactly, and the fit loop uses the weighted form.
pub fn em_step_direct(
    support: &SupportSet,
    w: &WeightSpec,
    pi_old: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    let problem = Problem::build(support, w)?;
    check_points_match(support, pi_old)?;
    let pi = pi_old.masses();
    let mut suffix = Vec::new();
    kahan_suffix_sums(pi, &mut suffix);
    let mut acc = 0.0;
    let mut out = vec![0.0; pi.len()];
    for j in 0..pi.len() {
        if problem.zeta[j] > 0.0 {
            if suffix[j] <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "no mass at or above the censored point t = {}",
                    problem.points[j]
                )));
            }
            acc += problem.zeta[j] / suffix[j];
        }
        out[j] = (problem.xi[j] + pi[j] * acc) / problem.n_obs;
    }
    let total = kahan_sum(&out);
    out.iter_mut().for_each(|v| *v /= total);
    DiscreteDistribution::new(support.points().to_vec(), out)
}

/// Invert a weighted law into the unbiased law: `pi_j ∝ p_j / W(t_j)`.
pub fn invert_weighted(
    support: &SupportSet,
    w: &WeightSpec,
    p: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    check_points_match(support, p)?;
    let mut weights = Vec::with_capacity(support.len());
    for t in support.points() {
        weights.push(w.eval(*t)?);
    }
    invert_on_points(support.points(), &weights, p.masses())
}

fn invert_on_points(points: &[f64], weights: &[f64], p: &[f64]) -> Result<DiscreteDistribution> {
    let mut pi = vec![0.0; p.len()];
    for j in 0..p.len() {
        if weights[j] == 0.0 {
            if p[j] > 0.0 {
                return Err(Error::Unidentifiable(format!(
                    "weighted mass {} sits at t = {} where the weight vanishes",
                    p[j], points[j]
                )));
            }
            pi[j] = 0.0;
        } else {
            pi[j] = p[j] / weights[j];
        }
    }
    let total = kahan_sum(&pi);
    if total <= 0.0 {
        return Err(Error::Degenerate("all inverted mass is zero".into()));
    }
    pi.iter_mut().for_each(|v| *v /= total);
    DiscreteDistribution::new(points.to_vec(), pi)
}

/// Fit the NPMLE on a sample under a known weight.
pub fn fit_npmle(sample: &Sample, w: &WeightSpec, cfg: &EmConfig) -> Result<Fit> {
    let support = reduce_support(sample, w)?;
    fit_on_support(&support, w, cfg)
}

/// Fit the NPMLE on an explicit support set.
///
/// Support points where the weight vanishes cannot carry weighted mass: an
/// exact observation there makes the problem unidentifiable, while a
/// censored-only point is dropped and its censoring term shifted to the next
/// point with positive weight. The returned `pi` then estimates the law
/// conditional on the region where the weight is positive.
pub fn fit_on_support(support: &SupportSet, w: &WeightSpec, cfg: &EmConfig) -> Result<Fit> {
    cfg.validate()?;
    let (support, conditional_above) = restrict_to_positive_weight(support, w)?;
    let problem = Problem::build(&support, w)?;
    let h = problem.points.len();

    let mut p: Vec<f64> = match &cfg.init {
        Init::Uniform => vec![1.0 / h as f64; h],
        Init::Custom(masses) => {
            // Must itself be a distribution on the reduced support.
            DiscreteDistribution::new(support.points().to_vec(), masses.clone())?;
            masses.clone()
        }
    };

    let mut scratch = Vec::new();
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut iterations = 0;
    let mut converged = false;

    if problem.total_censored == 0.0 {
        // No censored mass to redistribute: the weighted law is the
        // empirical law of the exact observations, no iteration needed.
        p = problem.xi.iter().map(|x| x / problem.n_obs).collect();
        converged = true;
    } else {
        let mut prev_ll = problem.loglik(&p, &mut scratch);
        if let Some(tr) = trace.as_mut() {
            tr.push(prev_ll);
        }
        let mut p_next = vec![0.0; h];
        for iter in 1..=cfg.max_iter {
            problem.step(&p, &mut p_next, &mut scratch)?;
            let delta = p
                .iter()
                .zip(&p_next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            std::mem::swap(&mut p, &mut p_next);
            iterations = iter;

            let ll = problem.loglik(&p, &mut scratch);
            if let Some(tr) = trace.as_mut() {
                tr.push(ll);
            }
            // An exactly-zero change means the likelihood collided at float
            // resolution, not that it settled; only a measurable change can
            // satisfy the plateau rule, otherwise the mass rule decides.
            let change = (ll - prev_ll).abs();
            let ll_settled = prev_ll.is_finite()
                && ll.is_finite()
                && change > 0.0
                && change <= cfg.loglik_tol * (1.0 + prev_ll.abs());
            prev_ll = ll;
            if delta <= cfg.mass_tol || ll_settled {
                converged = true;
                break;
            }
        }
    }

    let loglik = problem.loglik(&p, &mut scratch);
    let p_dist = DiscreteDistribution::new(support.points().to_vec(), p)?;
    let pi = invert_on_points(support.points(), &problem.weights, p_dist.masses())?;
    let mu_star = pi
        .masses()
        .iter()
        .zip(&problem.weights)
        .map(|(m, w)| m * w)
        .sum();

    Ok(Fit {
        support,
        p: p_dist,
        pi,
        loglik,
        iterations,
        converged,
        mu_star,
        conditional_above,
        loglik_trace: trace,
    })
}

/// Fit from cross-sectional age/residual records: an event record enters as
/// an exact observation at age + residual, a censored record as a censoring
/// time at age + observed residual. A record censored at sampling itself
/// (zero follow-up) contributes its age alone.
pub fn estimate_from_age_residual(
    records: &[AgeResidualRecord],
    w: &WeightSpec,
    cfg: &EmConfig,
) -> Result<Fit> {
    let sample = Sample::from_age_residual(records)?;
    fit_npmle(&sample, w, cfg)
}

/// Drop support points where the weight vanishes. Exact mass there is an
/// identifiability error; censored-only points move into the exclusion audit
/// and their censoring terms shift to the next retained point.
fn restrict_to_positive_weight(
    support: &SupportSet,
    w: &WeightSpec,
) -> Result<(SupportSet, Option<f64>)> {
    let mut zero_points: Vec<usize> = Vec::new();
    for (j, t) in support.points().iter().enumerate() {
        if w.eval(*t)? == 0.0 {
            zero_points.push(j);
        }
    }
    let conditional_above = w.zero_boundary();
    if zero_points.is_empty() {
        return Ok((support.clone(), conditional_above));
    }
    for &j in &zero_points {
        if support.exact_mult()[j] > 0 {
            return Err(Error::Unidentifiable(format!(
                "exact observation at t = {} where the weight vanishes{}",
                support.points()[j],
                conditional_above
                    .map(|b| format!(" (weight is zero on (0, {b}])"))
                    .unwrap_or_default()
            )));
        }
    }
    if zero_points.len() == support.len() {
        return Err(Error::Unidentifiable(
            "the weight vanishes at every support point".into(),
        ));
    }

    let keep: Vec<usize> = (0..support.len())
        .filter(|j| !zero_points.contains(j))
        .collect();
    let points: Vec<f64> = keep.iter().map(|&j| support.points()[j]).collect();
    let exact_mult: Vec<u32> = keep.iter().map(|&j| support.exact_mult()[j]).collect();
    let cens_mult: Vec<u32> = keep.iter().map(|&j| support.cens_mult()[j]).collect();

    let mut excluded = support.excluded().to_vec();
    for &j in &zero_points {
        let value = support.points()[j];
        let absorber = match points.iter().find(|t| **t >= value) {
            Some(t) => *t,
            None => {
                return Err(Error::Degenerate(format!(
                    "censored observation at t = {value} has no support point with positive \
                     weight at or above it"
                )))
            }
        };
        excluded.push(Exclusion {
            value,
            multiplicity: support.cens_mult()[j],
            rule: ExclusionRule::ZeroWeightRegion,
            absorbed_by: absorber,
        });
    }
    Ok((
        SupportSet::new(points, exact_mult, cens_mult, excluded)?,
        conditional_above,
    ))
}

fn check_points_match(support: &SupportSet, d: &DiscreteDistribution) -> Result<()> {
    if support.points() != d.points() {
        return Err(Error::Invalid(
            "mass vector lives on different support points".into(),
        ));
    }
    Ok(())
}

/// Precomputed per-support quantities for the inner loops.
struct Problem {
    points: Vec<f64>,
    weights: Vec<f64>,
    inv_w: Vec<f64>,
    xi: Vec<f64>,
    zeta: Vec<f64>,
    total_censored: f64,
    n_obs: f64,
}

impl Problem {
    fn build(support: &SupportSet, w: &WeightSpec) -> Result<Self> {
        let points = support.points().to_vec();
        let mut weights = Vec::with_capacity(points.len());
        for t in &points {
            let wt = w.eval(*t)?;
            if wt == 0.0 {
                return Err(Error::Unidentifiable(format!(
                    "the weight vanishes at support point t = {t}"
                )));
            }
            weights.push(wt);
        }
        let inv_w = weights.iter().map(|w| 1.0 / w).collect();
        let xi: Vec<f64> = support.exact_mult().iter().map(|x| f64::from(*x)).collect();
        let zeta = support.effective_cens_mult();
        let total_exact: f64 = xi.iter().sum();
        let total_censored: f64 = zeta.iter().sum();
        Ok(Self {
            points,
            weights,
            inv_w,
            xi,
            zeta,
            total_censored,
            n_obs: total_exact + total_censored,
        })
    }

    /// `suffix[k] = sum_{l >= k} p_l / W(t_l)`, Kahan-compensated.
    fn weighted_suffix(&self, p: &[f64], suffix: &mut Vec<f64>) {
        suffix.clear();
        suffix.resize(p.len(), 0.0);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for k in (0..p.len()).rev() {
            let y = p[k] * self.inv_w[k] - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            suffix[k] = sum;
        }
    }

    fn step(&self, p: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        self.weighted_suffix(p, scratch);
        let mut acc = 0.0;
        for j in 0..p.len() {
            if self.zeta[j] > 0.0 {
                if scratch[j] <= 0.0 {
                    return Err(Error::Degenerate(format!(
                        "no mass at or above the censored point t = {}",
                        self.points[j]
                    )));
                }
                acc += self.zeta[j] / scratch[j];
            }
            out[j] = (self.xi[j] + p[j] * self.inv_w[j] * acc) / self.n_obs;
        }
        let total = kahan_sum(out);
        out.iter_mut().for_each(|v| *v /= total);
        Ok(())
    }

    fn loglik(&self, p: &[f64], scratch: &mut Vec<f64>) -> f64 {
        self.weighted_suffix(p, scratch);
        let mut ll = 0.0;
        for j in 0..p.len() {
            if self.xi[j] > 0.0 {
                if p[j] <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += self.xi[j] * p[j].ln();
            }
            if self.zeta[j] > 0.0 {
                if scratch[j] <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += self.zeta[j] * scratch[j].ln();
            }
        }
        ll
    }
}
