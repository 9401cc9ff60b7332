//! Product-limit estimation for left-truncated, right-censored records.
//!
//! The hazard at an event time t is the number of events at t divided by the
//! number of records at risk there, where a record with entry a and exit e is
//! at risk iff `a <= t <= e` (closed on both ends). Survival is the product
//! of one minus the hazards; masses are the survival decrements. The
//! estimator needs no knowledge of the truncation law, but it is not well
//! defined when the risk group empties before the last event.

use serde::Serialize;

use crate::data::TruncatedRecord;
use crate::discrete::DiscreteDistribution;
use crate::error::{Error, Result};

/// A fitted product-limit estimate.
#[derive(Debug, Clone, Serialize)]
pub struct PleFit {
    /// Estimated lifetime law: masses at event times plus any terminal mass.
    pub distribution: DiscreteDistribution,
    /// False when survival hits zero strictly before the last event time:
    /// the risk group emptied and the estimate beyond that point is
    /// meaningless.
    pub defined: bool,
    /// `(event time, hazard)` pairs.
    pub hazards: Vec<(f64, f64)>,
    /// Mass left after the last event, placed at the largest observed exit
    /// so the estimate integrates to one.
    pub tail_mass: f64,
    /// Where the tail mass was placed, when there was any.
    pub tail_at: Option<f64>,
}

impl PleFit {
    pub fn survival_at(&self, t: f64) -> f64 {
        self.distribution.survival(t)
    }
}

/// Fit the product-limit estimator. Errors when the records contain no event.
pub fn fit_ple(records: &[TruncatedRecord]) -> Result<PleFit> {
    let hazards = hazards(records)?;
    let mut survival = 1.0;
    let mut defined = true;
    let mut points = Vec::with_capacity(hazards.len());
    let mut masses = Vec::with_capacity(hazards.len());
    for (i, (t, h)) in hazards.iter().enumerate() {
        points.push(*t);
        masses.push(survival * h);
        survival *= 1.0 - h;
        if survival <= 0.0 && i + 1 < hazards.len() {
            defined = false;
        }
    }

    let mut tail_at = None;
    let tail_mass = survival.max(0.0);
    if tail_mass > 0.0 {
        let last_exit = records
            .iter()
            .map(|r| r.exit)
            .fold(f64::NEG_INFINITY, f64::max);
        tail_at = Some(last_exit);
        if last_exit > *points.last().unwrap() {
            points.push(last_exit);
            masses.push(tail_mass);
        } else {
            // The largest exit is the last event time itself.
            *masses.last_mut().unwrap() += tail_mass;
        }
    }

    Ok(PleFit {
        distribution: DiscreteDistribution::new(points, masses)?,
        defined,
        hazards,
        tail_mass,
        tail_at,
    })
}

/// Whether the product-limit estimator is well defined on these records:
/// survival must stay positive until the last event time.
pub fn ple_defined(records: &[TruncatedRecord]) -> bool {
    match hazards(records) {
        Ok(hz) => {
            let mut survival = 1.0;
            for (i, (_, h)) in hz.iter().enumerate() {
                survival *= 1.0 - h;
                if survival <= 0.0 && i + 1 < hz.len() {
                    return false;
                }
            }
            true
        }
        Err(_) => true, // no events: nothing to contradict
    }
}

fn hazards(records: &[TruncatedRecord]) -> Result<Vec<(f64, f64)>> {
    if records.is_empty() {
        return Err(Error::Invalid("no records".into()));
    }
    let mut event_times: Vec<f64> = records.iter().filter(|r| r.event).map(|r| r.exit).collect();
    if event_times.is_empty() {
        return Err(Error::Invalid(
            "no events: the product-limit estimator is undefined".into(),
        ));
    }
    event_times.sort_by(f64::total_cmp);

    let mut entries: Vec<f64> = records.iter().map(|r| r.entry).collect();
    entries.sort_by(f64::total_cmp);
    let mut exits: Vec<f64> = records.iter().map(|r| r.exit).collect();
    exits.sort_by(f64::total_cmp);

    let mut hz = Vec::new();
    let mut i = 0;
    while i < event_times.len() {
        let t = event_times[i];
        let mut deaths = 1u32;
        while i + 1 < event_times.len() && event_times[i + 1] == t {
            deaths += 1;
            i += 1;
        }
        i += 1;
        // at risk: entry <= t <= exit.
        let risk = entries.partition_point(|a| *a <= t) - exits.partition_point(|e| *e < t);
        debug_assert!(risk >= deaths as usize);
        hz.push((t, f64::from(deaths) / risk as f64));
    }
    Ok(hz)
}
