//! Discrete distributions on a finite set of support points.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a discrete distribution.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// A probability distribution with atoms at strictly increasing positive
/// points. Masses may be zero; they sum to one within [`MASS_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    points: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(Error::Invalid(format!(
                "need matching non-empty points/masses, got {} and {}",
                points.len(),
                masses.len()
            )));
        }
        if points.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::Invalid(
                "support points must be finite and > 0".into(),
            ));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Invalid(
                "support points must be strictly increasing".into(),
            ));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Invalid("masses must be finite and >= 0".into()));
        }
        let total = kahan_sum(&masses);
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::Invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { points, masses })
    }

    /// Point mass at a single atom.
    pub fn point_mass(at: f64) -> Result<Self> {
        Self::new(vec![at], vec![1.0])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one point
    }

    /// Right-continuous CDF: mass at points <= t.
    pub fn cdf(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|p| *p <= t);
        kahan_sum(&self.masses[..idx]).min(1.0)
    }

    /// Right-continuous survival function `1 - cdf(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        (1.0 - self.cdf(t)).max(0.0)
    }

    /// Expectation of `f` over the atoms.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.masses)
            .map(|(t, m)| f(*t) * m)
            .sum()
    }
}

/// Compensated sum; the estimators accumulate many small masses.
pub(crate) fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Suffix sums `out[k] = sum_{l >= k} values[l]` with Kahan compensation.
pub(crate) fn kahan_suffix_sums(values: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.resize(values.len(), 0.0);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in (0..values.len()).rev() {
        let y = values[k] - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out[k] = sum;
    }
}
