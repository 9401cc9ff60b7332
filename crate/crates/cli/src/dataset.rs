//! Dataset files: comma-separated, headered, "." decimal point, UTF-8.
//!
//! Three shapes are understood:
//!   durations     value,status          status 1 = exact, 0 = censored
//!   truncated     entry,exit,status     status 1 = event at exit
//!   age-residual  age,residual,status   status 1 = observed residual

use std::fmt;
use std::path::Path;

use survbias::{AgeResidualRecord, Observation, ObservationKind, Sample, TruncatedRecord};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DatasetFormat {
    Durations,
    Truncated,
    AgeResidual,
}

impl DatasetFormat {
    pub fn headers(self) -> &'static [&'static str] {
        match self {
            DatasetFormat::Durations => &["value", "status"],
            DatasetFormat::Truncated => &["entry", "exit", "status"],
            DatasetFormat::AgeResidual => &["age", "residual", "status"],
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatasetFormat::Durations => "durations",
            DatasetFormat::Truncated => "truncated",
            DatasetFormat::AgeResidual => "age-residual",
        };
        f.write_str(s)
    }
}

/// A parsed dataset of one of the three shapes.
pub enum Dataset {
    Durations(Vec<Observation>),
    Truncated(Vec<TruncatedRecord>),
    AgeResidual(Vec<AgeResidualRecord>),
}

impl Dataset {
    /// The sample of durations the NPMLE consumes.
    pub fn to_sample(&self) -> Result<Sample, CliError> {
        let sample = match self {
            Dataset::Durations(obs) => Sample::from_observations(obs),
            Dataset::Truncated(recs) => Sample::from_truncated(recs),
            Dataset::AgeResidual(recs) => Sample::from_age_residual(recs),
        };
        sample.map_err(CliError::from)
    }
}

pub fn parse_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;

    let expected = format.headers();
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got != expected {
        return Err(CliError::input(format!(
            "{}: header {:?} does not match the {format} format {:?}",
            path.display(),
            got,
            expected
        )));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| CliError::input(format!("row {row}: {e}")))?;
        if record.len() != expected.len() {
            return Err(CliError::input(format!(
                "row {row}: expected {} fields, found {}",
                expected.len(),
                record.len()
            )));
        }
        let mut values = Vec::with_capacity(expected.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::input(format!(
                    "row {row}, column {} ({}): cannot parse {field:?} as a number",
                    col + 1,
                    expected[col]
                ))
            })?;
            values.push(v);
        }
        let status = *values.last().unwrap();
        if status != 0.0 && status != 1.0 {
            return Err(CliError::input(format!(
                "row {row}, column {} (status): must be 0 or 1, got {status}",
                expected.len()
            )));
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }

    match format {
        DatasetFormat::Durations => {
            let mut obs = Vec::with_capacity(rows.len());
            for (i, v) in rows.iter().enumerate() {
                let kind = if v[1] == 1.0 {
                    ObservationKind::Exact
                } else {
                    ObservationKind::Censored
                };
                obs.push(
                    Observation::new(v[0], kind)
                        .map_err(|e| CliError::input(format!("row {}: {e}", i + 1)))?,
                );
            }
            Ok(Dataset::Durations(obs))
        }
        DatasetFormat::Truncated => {
            let mut recs = Vec::with_capacity(rows.len());
            for (i, v) in rows.iter().enumerate() {
                recs.push(
                    TruncatedRecord::new(v[0], v[1], v[2] == 1.0)
                        .map_err(|e| CliError::input(format!("row {}: {e}", i + 1)))?,
                );
            }
            Ok(Dataset::Truncated(recs))
        }
        DatasetFormat::AgeResidual => {
            let mut recs = Vec::with_capacity(rows.len());
            for (i, v) in rows.iter().enumerate() {
                recs.push(
                    AgeResidualRecord::new(v[0], v[1], v[2] == 1.0)
                        .map_err(|e| CliError::input(format!("row {}: {e}", i + 1)))?,
                );
            }
            Ok(Dataset::AgeResidual(recs))
        }
    }
}

/// Write a survival curve as `t,survival` rows, starting from survival 1 at 0.
pub fn write_survival_csv(
    path: &Path,
    points: &[f64],
    survival: impl Fn(f64) -> f64,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::input(format!("writing {}: {e}", path.display()));
    w.write_record(["t", "survival"]).map_err(io)?;
    w.write_record(["0", "1"]).map_err(io)?;
    for t in points {
        w.write_record([format!("{t}"), format!("{}", survival(*t))])
            .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::input(format!("flushing {}: {e}", path.display())))?;
    Ok(())
}
