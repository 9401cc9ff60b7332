//! Known monotone sampling-bias functions.
//!
//! A weight `W` is a non-negative, non-decreasing, right-continuous function
//! on the positive half line. Observations enter the sample with probability
//! proportional to `W(lifetime)`; the estimators only ever evaluate `W` at
//! data points and invert it through its generalized inverse
//! `W^{-1}(y) = min{v : W(v) >= y}`.
//!
//! The catalog covers the sampling designs the estimator is meant for:
//! constant weights (plain random censoring), linear and shifted-linear
//! weights (cross-sectional and window sampling), truncated-interval weights,
//! cumulative entry rates, step weights from discrete entrance epochs, and
//! tabulated monotone functions (for example an assumed truncation CDF).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::DistSpec;

/// Relative tolerance for deciding that two weight values lie on the same
/// plateau. Plateau detection drives the support-reduction rules, which are
/// exact equalities in theory but must survive table evaluation in floats.
pub const DEFAULT_WEIGHT_EQ_TOL: f64 = 1e-9;

/// Number of grid points used when tabulating an analytic CDF into a
/// piecewise-linear table.
pub const CDF_GRID_POINTS: usize = 1 << 14;

/// Interpolation rule for tabulated weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Step function: the value at the greatest knot at or below `t`.
    Flat,
    /// Piecewise-linear between knots.
    Linear,
}

/// A validated weight function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum WeightSpec {
    /// `W(x) = c` with `c > 0`.
    Constant { value: f64 },
    /// `W(x) = x` (size bias).
    Linear,
    /// `W(x) = x + offset` (window sampling with window width `offset`).
    ShiftedLinear { offset: f64 },
    /// `W(x) = [min(x, beta) - alpha]^+` (entries restricted to an age window).
    TruncatedInterval { alpha: f64, beta: f64 },
    /// Piecewise-linear cumulative of an entry-rate grid; `knots` are the
    /// derived `(t, W(t))` pairs and `grid_points` records the input grid size.
    CumulativeRate {
        knots: Vec<(f64, f64)>,
        grid_points: usize,
    },
    /// Step weight from discrete entrance epochs: jump of `increments[k]` at
    /// `locations[k]`, locations strictly increasing and non-negative.
    Step {
        locations: Vec<f64>,
        increments: Vec<f64>,
    },
    /// Tabulated monotone function with an explicit interpolation rule.
    CdfTable {
        knots: Vec<(f64, f64)>,
        interpolation: Interpolation,
    },
}

/// Weight configuration as accepted from JSON. `build_weight` validates it
/// into a [`WeightSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum WeightConfig {
    Constant {
        value: f64,
    },
    Linear,
    ShiftedLinear {
        offset: f64,
    },
    TruncatedInterval {
        alpha: f64,
        beta: f64,
    },
    CumulativeRate {
        grid: Vec<(f64, f64)>,
        window_end: f64,
    },
    Step {
        epochs: Vec<f64>,
        weights: Vec<f64>,
    },
    CdfTable {
        knots: Vec<(f64, f64)>,
        interpolation: Interpolation,
    },
    /// Tabulates the CDF of a parametric family on a quantile grid; used when
    /// the bias is a known truncation distribution given in closed form.
    DistCdf {
        dist: DistSpec,
    },
}

/// Build a validated weight from a configuration record.
pub fn build_weight(config: &WeightConfig) -> Result<WeightSpec> {
    match config {
        WeightConfig::Constant { value } => {
            if !value.is_finite() || *value <= 0.0 {
                return Err(Error::Construction(format!(
                    "constant weight must be positive and finite, got {value}"
                )));
            }
            Ok(WeightSpec::Constant { value: *value })
        }
        WeightConfig::Linear => Ok(WeightSpec::Linear),
        WeightConfig::ShiftedLinear { offset } => {
            if !offset.is_finite() || *offset < 0.0 {
                return Err(Error::Construction(format!(
                    "shifted-linear offset must be >= 0, got {offset}"
                )));
            }
            Ok(WeightSpec::ShiftedLinear { offset: *offset })
        }
        WeightConfig::TruncatedInterval { alpha, beta } => {
            if !alpha.is_finite() || !beta.is_finite() || *alpha < 0.0 || *beta <= *alpha {
                return Err(Error::Construction(format!(
                    "truncated interval requires 0 <= alpha < beta, got alpha={alpha}, beta={beta}"
                )));
            }
            Ok(WeightSpec::TruncatedInterval {
                alpha: *alpha,
                beta: *beta,
            })
        }
        WeightConfig::CumulativeRate { grid, window_end } => {
            build_cumulative_rate(grid, *window_end)
        }
        WeightConfig::Step { epochs, weights } => build_step(epochs, weights),
        WeightConfig::CdfTable {
            knots,
            interpolation,
        } => {
            validate_table(knots)?;
            Ok(WeightSpec::CdfTable {
                knots: knots.clone(),
                interpolation: *interpolation,
            })
        }
        WeightConfig::DistCdf { dist } => {
            dist.validate()?;
            Ok(WeightSpec::CdfTable {
                knots: tabulate_cdf(dist, CDF_GRID_POINTS),
                interpolation: Interpolation::Linear,
            })
        }
    }
}

fn validate_table(knots: &[(f64, f64)]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::Construction(
            "a weight table needs at least two knots".into(),
        ));
    }
    for pair in knots.windows(2) {
        let ((t0, w0), (t1, w1)) = (pair[0], pair[1]);
        if !(t0.is_finite() && t1.is_finite() && w0.is_finite() && w1.is_finite()) {
            return Err(Error::Construction("table knots must be finite".into()));
        }
        if t1 <= t0 {
            return Err(Error::Construction(format!(
                "table abscissae must be strictly increasing ({t0} then {t1})"
            )));
        }
        if w1 < w0 {
            return Err(Error::Construction(format!(
                "table values must be non-decreasing ({w0} then {w1})"
            )));
        }
    }
    if knots[0].1 < 0.0 {
        return Err(Error::Construction(
            "table values must be non-negative".into(),
        ));
    }
    if knots.last().unwrap().1 <= 0.0 {
        return Err(Error::Construction(
            "weight is identically zero on the table".into(),
        ));
    }
    Ok(())
}

fn build_step(epochs: &[f64], weights: &[f64]) -> Result<WeightSpec> {
    if epochs.is_empty() || epochs.len() != weights.len() {
        return Err(Error::Construction(
            "step weight needs matching, non-empty epoch and weight lists".into(),
        ));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().all(|w| *w == 0.0) {
        return Err(Error::Construction(
            "step weights must be non-negative with at least one positive".into(),
        ));
    }
    // An entrance at epoch sigma_k <= 0 contributes from lifetime -sigma_k on.
    let mut jumps: Vec<(f64, f64)> = epochs
        .iter()
        .zip(weights)
        .map(|(sigma, lambda)| (-sigma, *lambda))
        .collect();
    if jumps.iter().any(|(loc, _)| !loc.is_finite() || *loc < 0.0) {
        return Err(Error::Construction(
            "step epochs must be finite and <= 0".into(),
        ));
    }
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    if jumps.windows(2).any(|p| p[0].0 == p[1].0) {
        return Err(Error::Construction("step epochs must be distinct".into()));
    }
    let (locations, increments) = jumps.into_iter().unzip();
    Ok(WeightSpec::Step {
        locations,
        increments,
    })
}

fn build_cumulative_rate(grid: &[(f64, f64)], window_end: f64) -> Result<WeightSpec> {
    if grid.len() < 2 {
        return Err(Error::Construction(
            "rate grid needs at least two points".into(),
        ));
    }
    if !window_end.is_finite() || window_end < 0.0 {
        return Err(Error::Construction(
            "window end must be finite and >= 0".into(),
        ));
    }
    for pair in grid.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::Construction(
                "rate grid abscissae must be strictly increasing".into(),
            ));
        }
    }
    if grid
        .iter()
        .any(|(u, r)| !u.is_finite() || !r.is_finite() || *r < 0.0)
    {
        return Err(Error::Construction(
            "rates must be finite and non-negative".into(),
        ));
    }
    // Trapezoid cumulative T(u) on the grid, truncated at the window end.
    // W(x) = T(c_eff) - T(-x) with flat extension outside the grid, which is
    // piecewise linear in x with knots at the negated grid points.
    let c_eff = window_end.min(grid.last().unwrap().0);
    if c_eff <= grid[0].0 {
        return Err(Error::Construction(
            "window end lies at or before the rate grid start; weight is identically zero".into(),
        ));
    }
    let mut cum = Vec::with_capacity(grid.len());
    cum.push(0.0);
    for pair in grid.windows(2) {
        let ((u0, r0), (u1, r1)) = (pair[0], pair[1]);
        let hi = u1.min(c_eff);
        let seg = if hi <= u0 {
            0.0
        } else {
            // Interpolate the rate at the truncation point when the window
            // ends inside this cell.
            let r_hi = r0 + (r1 - r0) * (hi - u0) / (u1 - u0);
            0.5 * (r0 + r_hi) * (hi - u0)
        };
        cum.push(cum.last().unwrap() + seg);
    }
    let total = *cum.last().unwrap();
    if total <= 0.0 {
        return Err(Error::Construction(
            "rate grid integrates to zero over the window".into(),
        ));
    }
    let mut knots: Vec<(f64, f64)> = grid
        .iter()
        .zip(&cum)
        .filter(|((u, _), _)| *u <= c_eff)
        .map(|((u, _), t_u)| (-u, total - t_u))
        .collect();
    knots.push((-c_eff, 0.0));
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    knots.dedup_by(|a, b| a.0 == b.0);
    // Keep the evaluator's domain covering all positive lifetimes even when
    // the window ends below zero (entries stopped before sampling time).
    if knots[0].0 > 0.0 {
        knots.insert(0, (0.0, 0.0));
    }
    Ok(WeightSpec::CumulativeRate {
        knots,
        grid_points: grid.len(),
    })
}

fn tabulate_cdf(dist: &DistSpec, points: usize) -> Vec<(f64, f64)> {
    // Union of an equal-probability grid (dense where the density is large)
    // and an equal-abscissa grid (controls interpolation error in the tail),
    // clipped at the 1 - 1e-8 quantile. A (0, 0) anchor keeps the whole
    // positive axis inside the table domain.
    let top = dist.quantile(1.0 - 1e-8);
    let mut abscissae = Vec::with_capacity(2 * points);
    for i in 1..=points {
        abscissae.push(dist.quantile((i as f64 / points as f64) * (1.0 - 1e-8)));
        abscissae.push(top * i as f64 / points as f64);
    }
    abscissae.sort_by(f64::total_cmp);
    let mut knots = Vec::with_capacity(abscissae.len() + 1);
    knots.push((0.0, 0.0));
    for t in abscissae {
        if t > knots.last().unwrap().0 {
            knots.push((t, dist.cdf(t)));
        }
    }
    knots
}

impl WeightSpec {
    /// Evaluate `W(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::Invalid(format!(
                "weight evaluation needs finite t > 0, got {t}"
            )));
        }
        match self {
            WeightSpec::Constant { value } => Ok(*value),
            WeightSpec::Linear => Ok(t),
            WeightSpec::ShiftedLinear { offset } => Ok(t + offset),
            WeightSpec::TruncatedInterval { alpha, beta } => Ok((t.min(*beta) - alpha).max(0.0)),
            WeightSpec::Step {
                locations,
                increments,
            } => {
                let idx = locations.partition_point(|loc| *loc <= t);
                Ok(increments[..idx].iter().sum())
            }
            WeightSpec::CumulativeRate { knots, .. } => table_eval(knots, Interpolation::Linear, t),
            WeightSpec::CdfTable {
                knots,
                interpolation,
            } => table_eval(knots, *interpolation, t),
        }
    }

    /// Generalized inverse `min{v : W(v) >= y}`.
    ///
    /// Errors with [`Error::NoSolution`] when `y` exceeds the supremum of the
    /// weight over its domain.
    pub fn gen_inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::Invalid(format!(
                "generalized inverse needs finite y >= 0, got {y}"
            )));
        }
        let sup = self.sup();
        if y > sup {
            return Err(Error::NoSolution { y, sup });
        }
        match self {
            WeightSpec::Constant { .. } => Ok(0.0),
            WeightSpec::Linear => Ok(y),
            WeightSpec::ShiftedLinear { offset } => Ok((y - offset).max(0.0)),
            WeightSpec::TruncatedInterval { alpha, .. } => {
                Ok(if y == 0.0 { 0.0 } else { alpha + y })
            }
            WeightSpec::Step {
                locations,
                increments,
            } => {
                if y == 0.0 {
                    return Ok(0.0);
                }
                let mut cum = 0.0;
                for (loc, inc) in locations.iter().zip(increments) {
                    cum += inc;
                    if cum >= y {
                        return Ok(*loc);
                    }
                }
                // Guarded by the sup check up to rounding in the cumulative.
                Ok(*locations.last().unwrap())
            }
            WeightSpec::CumulativeRate { knots, .. } => {
                table_gen_inverse(knots, Interpolation::Linear, y)
            }
            WeightSpec::CdfTable {
                knots,
                interpolation,
            } => table_gen_inverse(knots, *interpolation, y),
        }
    }

    /// Supremum of the weight over its domain; `inf` for unbounded variants.
    pub fn sup(&self) -> f64 {
        match self {
            WeightSpec::Constant { value } => *value,
            WeightSpec::Linear | WeightSpec::ShiftedLinear { .. } => f64::INFINITY,
            WeightSpec::TruncatedInterval { alpha, beta } => beta - alpha,
            WeightSpec::Step { increments, .. } => increments.iter().sum(),
            WeightSpec::CumulativeRate { knots, .. } | WeightSpec::CdfTable { knots, .. } => {
                knots.last().unwrap().1
            }
        }
    }

    /// Whether `W(a)` and `W(b)` lie on the same plateau, using the default
    /// relative tolerance.
    pub fn values_equal(&self, a: f64, b: f64) -> Result<bool> {
        self.values_equal_tol(a, b, DEFAULT_WEIGHT_EQ_TOL)
    }

    /// Plateau test with an explicit relative tolerance.
    pub fn values_equal_tol(&self, a: f64, b: f64, rel_tol: f64) -> Result<bool> {
        let wa = self.eval(a)?;
        let wb = self.eval(b)?;
        Ok((wa - wb).abs() <= rel_tol * wa.abs().max(wb.abs()).max(1.0))
    }

    /// Right edge of the initial region where `W = 0`, when one exists.
    ///
    /// The lifetime law is only identifiable above this point; the estimators
    /// report their output as conditional on exceeding it.
    pub fn zero_boundary(&self) -> Option<f64> {
        let boundary = match self {
            WeightSpec::Constant { .. } | WeightSpec::Linear | WeightSpec::ShiftedLinear { .. } => {
                return None;
            }
            WeightSpec::TruncatedInterval { alpha, .. } => *alpha,
            WeightSpec::Step {
                locations,
                increments,
            } => {
                match locations
                    .iter()
                    .zip(increments)
                    .find(|(_, inc)| **inc > 0.0)
                {
                    Some((loc, _)) => *loc,
                    None => return None,
                }
            }
            WeightSpec::CumulativeRate { knots, .. } | WeightSpec::CdfTable { knots, .. } => {
                match knots.iter().rev().find(|(_, w)| *w == 0.0) {
                    Some((t, _)) => *t,
                    None => return None,
                }
            }
        };
        (boundary > 0.0).then_some(boundary)
    }

    /// Start of the domain on which the weight is defined (0 except for
    /// tables that begin above zero).
    pub fn domain_start(&self) -> f64 {
        match self {
            WeightSpec::CumulativeRate { knots, .. } | WeightSpec::CdfTable { knots, .. } => {
                knots[0].0.max(0.0)
            }
            _ => 0.0,
        }
    }
}

fn table_eval(knots: &[(f64, f64)], interpolation: Interpolation, t: f64) -> Result<f64> {
    let start = knots[0].0;
    if t < start {
        return Err(Error::Domain { t, start });
    }
    // Greatest knot index with abscissa <= t.
    let idx = knots.partition_point(|(k, _)| *k <= t) - 1;
    if idx + 1 == knots.len() {
        return Ok(knots[idx].1);
    }
    match interpolation {
        Interpolation::Flat => Ok(knots[idx].1),
        Interpolation::Linear => {
            let (t0, w0) = knots[idx];
            let (t1, w1) = knots[idx + 1];
            let frac = (t - t0) / (t1 - t0);
            let w = w0 + (w1 - w0) * frac;
            // Clamp against rounding so monotonicity survives interpolation.
            Ok(w.max(w0).min(w1))
        }
    }
}

fn table_gen_inverse(knots: &[(f64, f64)], interpolation: Interpolation, y: f64) -> Result<f64> {
    // First knot whose value reaches y.
    let idx = knots.partition_point(|(_, w)| *w < y);
    if idx == 0 {
        return Ok(knots[0].0);
    }
    if idx == knots.len() {
        // sup-checked by the caller; reachable only through rounding.
        return Ok(knots.last().unwrap().0);
    }
    match interpolation {
        Interpolation::Flat => Ok(knots[idx].0),
        Interpolation::Linear => {
            let (t0, w0) = knots[idx - 1];
            let (t1, w1) = knots[idx];
            if w1 == w0 {
                return Ok(knots[idx].0);
            }
            let v = t0 + (y - w0) * (t1 - t0) / (w1 - w0);
            Ok(v.max(t0).min(t1))
        }
    }
}
