//! JSON configuration loading: weight specifications (with CSV-backed
//! tables resolved inline) and generator configurations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use survbias::{build_weight, DistSpec, WeightConfig, WeightSpec};

use crate::CliError;

/// Load a weight configuration. The argument is a path to a JSON file or an
/// inline JSON object. Table variants may give `"csv": "path"` instead of
/// inline rows; the rows are loaded and inlined before validation.
pub fn load_weight(arg: &str, base_dir: &Path) -> Result<(WeightConfig, WeightSpec), CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::input(format!("cannot read weight config {arg}: {e}")))?
    };
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("weight config: {e}")))?;
    resolve_csv_tables(&mut value, base_dir)?;
    let config: WeightConfig = serde_json::from_value(value)
        .map_err(|e| CliError::input(format!("weight config: {e}")))?;
    let spec = build_weight(&config)?;
    Ok((config, spec))
}

fn resolve_csv_tables(value: &mut Value, base_dir: &Path) -> Result<(), CliError> {
    let Some(obj) = value.as_object_mut() else {
        return Ok(());
    };
    let Some(csv_path) = obj.get("csv").and_then(Value::as_str).map(String::from) else {
        return Ok(());
    };
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let key = match kind.as_str() {
        "CdfTable" => "knots",
        "CumulativeRate" => "grid",
        other => {
            return Err(CliError::input(format!(
                "weight config: \"csv\" is only valid for table variants, not {other:?}"
            )))
        }
    };
    let mut path = PathBuf::from(&csv_path);
    if path.is_relative() {
        path = base_dir.join(path);
    }
    let rows = read_pairs_csv(&path)?;
    obj.remove("csv");
    obj.insert(
        key.to_string(),
        Value::from(
            rows.into_iter()
                .map(|(a, b)| Value::from(vec![a, b]))
                .collect::<Vec<Value>>(),
        ),
    );
    Ok(())
}

fn read_pairs_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if idx == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            continue; // header row
        }
        if record.len() != 2 {
            return Err(CliError::input(format!(
                "{} row {}: expected two columns",
                path.display(),
                idx + 1
            )));
        }
        let a: f64 = record[0].parse().map_err(|_| {
            CliError::input(format!(
                "{} row {}: bad number {:?}",
                path.display(),
                idx + 1,
                &record[0]
            ))
        })?;
        let b: f64 = record[1].parse().map_err(|_| {
            CliError::input(format!(
                "{} row {}: bad number {:?}",
                path.display(),
                idx + 1,
                &record[1]
            ))
        })?;
        rows.push((a, b));
    }
    Ok(rows)
}

/// How a left-truncation simulation fixes its censoring.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensorRule {
    Constant(f64),
    Target(f64),
}

/// Generator configuration, one of the three sampling models.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GenConfig {
    LeftTruncated {
        g: DistSpec,
        w: DistSpec,
        censor: CensorRule,
        n: usize,
        seed: u64,
        #[serde(default)]
        stream: u64,
    },
    CrossSectional {
        g: DistSpec,
        w: WeightConfig,
        #[serde(default)]
        followup: Option<f64>,
        n: usize,
        seed: u64,
        #[serde(default)]
        stream: u64,
    },
    Multiplicative {
        g0: DistSpec,
        w: WeightConfig,
        m: usize,
        n: usize,
        seed: u64,
        #[serde(default)]
        stream: u64,
    },
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
