//! Result envelope, JSON and CSV writers.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Bumped whenever the envelope or any record layout changes shape.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// Typed experiment output before it is wrapped in the envelope.
#[derive(Clone, Debug, Serialize)]
pub struct Report<C, R, S> {
    pub config: C,
    pub records: Vec<R>,
    pub summary: S,
}

impl<C: Serialize, R: Serialize, S: Serialize> Report<C, R, S> {
    pub fn into_result(&self, experiment: &str, wall_clock_seconds: f64) -> Result<ExperimentResult> {
        let records = match serde_json::to_value(&self.records)? {
            Value::Array(v) => v,
            _ => unreachable!("a Vec serializes to an array"),
        };
        Ok(ExperimentResult {
            schema_version: SCHEMA_VERSION.into(),
            experiment: experiment.into(),
            config: serde_json::to_value(&self.config)?,
            records,
            summary: serde_json::to_value(&self.summary)?,
            wall_clock_seconds,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub schema_version: String,
    pub experiment: String,
    pub config: Value,
    pub records: Vec<Value>,
    pub summary: Value,
    /// Excluded from determinism comparisons.
    pub wall_clock_seconds: f64,
}

impl ExperimentResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// The envelope without timing fields; identical across re-runs.
    pub fn payload(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            m.remove("wall_clock_seconds");
        }
        Ok(serde_json::to_string(&v)?)
    }

    /// Flat table of the records: nested objects become dotted columns and
    /// arrays are embedded as JSON text.
    pub fn records_csv(&self) -> Result<String> {
        let rows: Vec<Map<String, Value>> = self
            .records
            .iter()
            .map(|r| {
                let mut flat = Map::new();
                flatten("", r, &mut flat);
                flat
            })
            .collect();
        let mut columns: Vec<String> = Vec::new();
        for row in &rows {
            for k in row.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&columns)?;
        for row in &rows {
            w.write_record(columns.iter().map(|c| row.get(c).map(cell).unwrap_or_default()))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `<out>` as JSON and the CSV extract next to it, or prints the
    /// JSON to stdout when no path is given.
    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        match out {
            None => print!("{}", self.to_json()?),
            Some(path) => {
                std::fs::write(path, self.to_json()?).with_context(|| format!("writing {}", path.display()))?;
                let csv_path = path.with_extension("csv");
                std::fs::write(&csv_path, self.records_csv()?)
                    .with_context(|| format!("writing {}", csv_path.display()))?;
            }
        }
        Ok(())
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        other => {
            out.insert(if prefix.is_empty() { "value".into() } else { prefix.into() }, other.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
