//! Support determination for the discrete maximum-likelihood problem.
//!
//! An NPMLE always exists that puts mass only on observed points. Exact
//! observations are always support points. A censored observation need not
//! be one when the weight is flat above it:
//!
//! * rule (i): some exact observation lies strictly above it on the same
//!   weight plateau, or
//! * rule (ii): some other censored observation lies strictly above it on the
//!   same plateau.
//!
//! In either case the censored point's likelihood factor is unchanged when
//! its potential atom moves up to the absorbing point, so it can be dropped
//! from the support while its censoring term is kept in the bookkeeping.
//!
//! For the multiplicative-censoring formulation the candidate points are the
//! exact values together with the generalized inverses of the reduced values,
//! each snapped to the smallest exact observation on its weight plateau when
//! one exists.

use serde::Serialize;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::weight::WeightSpec;

/// Why a censored observation was removed from the candidate support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionRule {
    /// An exact observation strictly above shares the weight value (rule i).
    EqualWeightExactAbove,
    /// A censored observation strictly above shares the weight value (rule ii).
    EqualWeightCensoredAbove,
    /// The weight vanishes at the point, so it cannot carry weighted mass;
    /// applied during fitting, not by the reduction rules.
    ZeroWeightRegion,
}

/// Audit record for a removed censored value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    /// The censored value that was removed.
    pub value: f64,
    /// How many censored observations sat at that value.
    pub multiplicity: u32,
    pub rule: ExclusionRule,
    /// The point that absorbs the removed atom (smallest eligible).
    pub absorbed_by: f64,
}

/// Candidate support points with observation multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportSet {
    points: Vec<f64>,
    exact_mult: Vec<u32>,
    cens_mult: Vec<u32>,
    excluded: Vec<Exclusion>,
}

impl SupportSet {
    /// Assemble and validate a support set. Every point must carry at least
    /// one observation, and the excluded values must lie below some point.
    pub fn new(
        points: Vec<f64>,
        exact_mult: Vec<u32>,
        cens_mult: Vec<u32>,
        excluded: Vec<Exclusion>,
    ) -> Result<Self> {
        if points.is_empty() || points.len() != exact_mult.len() || points.len() != cens_mult.len()
        {
            return Err(Error::Invalid(
                "support arrays must be non-empty and aligned".into(),
            ));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Invalid(
                "support points must be strictly increasing".into(),
            ));
        }
        if exact_mult.iter().zip(&cens_mult).any(|(x, z)| x + z == 0) {
            return Err(Error::Invalid(
                "every support point needs an observation".into(),
            ));
        }
        let top = *points.last().unwrap();
        if excluded.iter().any(|e| e.value > top) {
            return Err(Error::Invalid(
                "an excluded value lies above every support point".into(),
            ));
        }
        Ok(Self {
            points,
            exact_mult,
            cens_mult,
            excluded,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn exact_mult(&self) -> &[u32] {
        &self.exact_mult
    }

    pub fn cens_mult(&self) -> &[u32] {
        &self.cens_mult
    }

    pub fn excluded(&self) -> &[Exclusion] {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one point
    }

    /// Total exact observations.
    pub fn total_exact(&self) -> u32 {
        self.exact_mult.iter().sum()
    }

    /// Total censored observations, including excluded ones.
    pub fn total_censored(&self) -> u32 {
        self.cens_mult.iter().sum::<u32>()
            + self.excluded.iter().map(|e| e.multiplicity).sum::<u32>()
    }

    /// Censoring multiplicities for the likelihood: each retained censored
    /// value counts at its own point, and each excluded one at the first
    /// support point at or above it (both see the same retained tail, so the
    /// likelihood term is unchanged).
    pub fn effective_cens_mult(&self) -> Vec<f64> {
        let mut zeta: Vec<f64> = self.cens_mult.iter().map(|z| f64::from(*z)).collect();
        for e in &self.excluded {
            let j = self.points.partition_point(|t| *t < e.value);
            zeta[j] += f64::from(e.multiplicity);
        }
        zeta
    }
}

/// Candidate support of the biased-sampling likelihood: the distinct observed
/// values, both exact and censored.
pub fn critical_points(sample: &Sample) -> Vec<f64> {
    let mut points: Vec<f64> = sample
        .exact()
        .iter()
        .chain(sample.censored())
        .copied()
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Candidate support of the multiplicative-censoring likelihood: the exact
/// values together with the generalized inverses of the reduced values.
pub fn critical_points_multiplicative(
    exact: &[f64],
    reduced: &[f64],
    w: &WeightSpec,
) -> Result<Vec<f64>> {
    let mut points: Vec<f64> = exact.to_vec();
    for y in reduced {
        points.push(w.gen_inverse(*y)?);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points)
}

/// Keep all observed values as support points, applying no reduction rule.
/// The estimator assigns zero mass to redundant points on its own; this is
/// the inefficient but always-valid choice for cross-checks.
pub fn full_support(sample: &Sample) -> Result<SupportSet> {
    let points = critical_points(sample);
    let (exact_mult, cens_mult) = multiplicities(&points, sample.exact(), sample.censored());
    SupportSet::new(points, exact_mult, cens_mult, Vec::new())
}

/// Reduce the candidate support by the plateau rules. Exact observations are
/// always retained; a censored value is dropped when rule (i) or (ii)
/// applies, with rule (i) checked first and the smallest eligible absorber
/// recorded.
pub fn reduce_support(sample: &Sample, w: &WeightSpec) -> Result<SupportSet> {
    let mut xs: Vec<f64> = sample.exact().to_vec();
    xs.sort_by(f64::total_cmp);
    let mut ys: Vec<f64> = sample.censored().to_vec();
    ys.sort_by(f64::total_cmp);

    let mut retained: Vec<f64> = Vec::new();
    let mut excluded: Vec<Exclusion> = Vec::new();

    let mut i = 0;
    while i < ys.len() {
        let y = ys[i];
        let mut multiplicity = 1u32;
        while i + 1 < ys.len() && ys[i + 1] == y {
            multiplicity += 1;
            i += 1;
        }
        i += 1;

        // Rule (i): smallest exact observation strictly above y. Under a
        // monotone weight, if any exact above shares W(y) then the closest
        // one does.
        let xi = xs.partition_point(|x| *x <= y);
        if xi < xs.len() && w.values_equal(xs[xi], y)? {
            excluded.push(Exclusion {
                value: y,
                multiplicity,
                rule: ExclusionRule::EqualWeightExactAbove,
                absorbed_by: xs[xi],
            });
            continue;
        }
        // Rule (ii): smallest censored observation strictly above y.
        let yj = ys.partition_point(|v| *v <= y);
        if yj < ys.len() && w.values_equal(ys[yj], y)? {
            excluded.push(Exclusion {
                value: y,
                multiplicity,
                rule: ExclusionRule::EqualWeightCensoredAbove,
                absorbed_by: ys[yj],
            });
            continue;
        }
        retained.push(y);
    }

    let mut points: Vec<f64> = xs.iter().copied().chain(retained).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let retained_censored: Vec<f64> = {
        let excluded_set: Vec<f64> = excluded.iter().map(|e| e.value).collect();
        sample
            .censored()
            .iter()
            .copied()
            .filter(|y| !excluded_set.contains(y))
            .collect()
    };
    let (exact_mult, cens_mult) = multiplicities(&points, sample.exact(), &retained_censored);
    SupportSet::new(points, exact_mult, cens_mult, excluded)
}

/// Support reduction for the multiplicative-censoring formulation: each
/// reduced value maps to `min{ x_i : W(x_i) = W(W^{-1}(y)) }` when such an
/// exact observation exists, otherwise to `W^{-1}(y)` itself.
pub fn reduce_support_multiplicative(
    exact: &[f64],
    reduced: &[f64],
    w: &WeightSpec,
) -> Result<SupportSet> {
    if exact.is_empty() && reduced.is_empty() {
        return Err(Error::Invalid("need at least one observation".into()));
    }
    let mut xs: Vec<f64> = exact.to_vec();
    xs.sort_by(f64::total_cmp);

    let mut mapped: Vec<f64> = Vec::with_capacity(reduced.len());
    for y in reduced {
        let inv = w.gen_inverse(*y)?;
        let mut target = inv;
        for x in &xs {
            if w.values_equal(*x, inv)? {
                target = *x;
                break;
            }
        }
        mapped.push(target);
    }

    let mut points: Vec<f64> = xs.iter().copied().chain(mapped.iter().copied()).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let (exact_mult, cens_mult) = multiplicities(&points, &xs, &mapped);
    SupportSet::new(points, exact_mult, cens_mult, Vec::new())
}

fn multiplicities(points: &[f64], exact: &[f64], censored: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let mut xi = vec![0u32; points.len()];
    let mut zeta = vec![0u32; points.len()];
    for x in exact {
        let j = points.partition_point(|t| *t < *x);
        debug_assert!(points[j] == *x);
        xi[j] += 1;
    }
    for y in censored {
        let j = points.partition_point(|t| *t < *y);
        debug_assert!(points[j] == *y);
        zeta[j] += 1;
    }
    (xi, zeta)
}
