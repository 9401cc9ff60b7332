//! Observation containers: exact/censored durations, left-truncated records,
//! and age/residual records from cross-sectional follow-up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether an observed duration is an exact lifetime or a censoring time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservationKind {
    Exact,
    Censored,
}

/// A single observed duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub value: f64,
    pub kind: ObservationKind,
}

impl Observation {
    pub fn new(value: f64, kind: ObservationKind) -> Result<Self> {
        check_positive(value, "observation value")?;
        Ok(Self { value, kind })
    }
}

/// A left-truncated, possibly censored record: entry age, exit time, and
/// whether the exit was an observed event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedRecord {
    pub entry: f64,
    pub exit: f64,
    pub event: bool,
}

impl TruncatedRecord {
    pub fn new(entry: f64, exit: f64, event: bool) -> Result<Self> {
        if !entry.is_finite() || entry < 0.0 {
            return Err(Error::Invalid(format!(
                "entry age must be finite and >= 0, got {entry}"
            )));
        }
        check_positive(exit, "exit time")?;
        if entry > exit {
            return Err(Error::Invalid(format!("entry {entry} exceeds exit {exit}")));
        }
        Ok(Self { entry, exit, event })
    }
}

/// An age-at-sampling / residual-lifetime pair with an event flag for the
/// residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeResidualRecord {
    pub age: f64,
    pub residual: f64,
    pub event: bool,
}

impl AgeResidualRecord {
    pub fn new(age: f64, residual: f64, event: bool) -> Result<Self> {
        check_positive(age, "age at sampling")?;
        if !residual.is_finite() || residual < 0.0 {
            return Err(Error::Invalid(format!(
                "residual must be finite and >= 0, got {residual}"
            )));
        }
        Ok(Self {
            age,
            residual,
            event,
        })
    }

    /// Total observed duration.
    pub fn total(&self) -> f64 {
        self.age + self.residual
    }
}

/// The estimator's input: a multiset of exact lifetimes and a multiset of
/// censoring times, all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    exact: Vec<f64>,
    censored: Vec<f64>,
}

impl Sample {
    pub fn from_parts(exact: Vec<f64>, censored: Vec<f64>) -> Result<Self> {
        if exact.is_empty() && censored.is_empty() {
            return Err(Error::Invalid(
                "sample needs at least one observation".into(),
            ));
        }
        for v in exact.iter().chain(&censored) {
            check_positive(*v, "observation value")?;
        }
        Ok(Self { exact, censored })
    }

    pub fn from_observations(obs: &[Observation]) -> Result<Self> {
        let mut exact = Vec::new();
        let mut censored = Vec::new();
        for o in obs {
            match o.kind {
                ObservationKind::Exact => exact.push(o.value),
                ObservationKind::Censored => censored.push(o.value),
            }
        }
        Self::from_parts(exact, censored)
    }

    /// Project left-truncated records onto exit durations: with the
    /// truncation law absorbed into the weight, only the exits and their
    /// event flags enter the likelihood.
    pub fn from_truncated(records: &[TruncatedRecord]) -> Result<Self> {
        let mut exact = Vec::new();
        let mut censored = Vec::new();
        for r in records {
            if r.event {
                exact.push(r.exit);
            } else {
                censored.push(r.exit);
            }
        }
        Self::from_parts(exact, censored)
    }

    /// Map age/residual records to total durations: an event record yields an
    /// exact observation at age + residual, a censored record a censoring
    /// time at age + observed residual.
    pub fn from_age_residual(records: &[AgeResidualRecord]) -> Result<Self> {
        let mut exact = Vec::new();
        let mut censored = Vec::new();
        for r in records {
            if r.event {
                exact.push(r.total());
            } else {
                censored.push(r.total());
            }
        }
        Self::from_parts(exact, censored)
    }

    /// Exact lifetimes.
    pub fn exact(&self) -> &[f64] {
        &self.exact
    }

    /// Censoring times.
    pub fn censored(&self) -> &[f64] {
        &self.censored
    }

    /// Number of exact observations.
    pub fn m(&self) -> usize {
        self.exact.len()
    }

    /// Number of censored observations.
    pub fn n(&self) -> usize {
        self.censored.len()
    }

    pub fn len(&self) -> usize {
        self.m() + self.n()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one observation
    }
}

fn check_positive(v: f64, what: &str) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Invalid(format!(
            "{what} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_and_nonfinite_values() {
        assert!(Sample::from_parts(vec![0.0], vec![]).is_err());
        assert!(Sample::from_parts(vec![1.0], vec![f64::NAN]).is_err());
        assert!(Sample::from_parts(vec![], vec![]).is_err());
        assert!(Sample::from_parts(vec![], vec![2.0]).is_ok());
    }

    #[test]
    fn truncated_record_validation() {
        assert!(TruncatedRecord::new(2.0, 1.0, true).is_err());
        assert!(TruncatedRecord::new(0.0, 1.0, false).is_ok());
        assert!(TruncatedRecord::new(-1.0, 1.0, true).is_err());
    }

    #[test]
    fn truncated_records_project_to_exits() {
        let recs = vec![
            TruncatedRecord::new(782.0, 900.0, true).unwrap(),
            TruncatedRecord::new(800.0, 950.0, false).unwrap(),
        ];
        let s = Sample::from_truncated(&recs).unwrap();
        assert_eq!(s.exact(), &[900.0]);
        assert_eq!(s.censored(), &[950.0]);
    }

    #[test]
    fn age_residual_maps_to_totals() {
        let recs = vec![
            AgeResidualRecord::new(1.0, 2.0, true).unwrap(),
            AgeResidualRecord::new(1.0, 0.5, false).unwrap(),
        ];
        let s = Sample::from_age_residual(&recs).unwrap();
        assert_eq!(s.exact(), &[3.0]);
        assert_eq!(s.censored(), &[1.5]);
    }
}
