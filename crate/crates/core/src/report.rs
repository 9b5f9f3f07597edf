//! Versioned report envelope shared by every subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to replay a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub format: Format,
    /// Subcommand-specific settings, keyed by flag name.
    pub options: BTreeMap<String, Value>,
    pub policy: NumericPolicy,
}

impl RunConfig {
    pub fn new(subcommand: &str, format: Format) -> Self {
        RunConfig {
            subcommand: subcommand.into(),
            family: None,
            seed: None,
            format,
            options: BTreeMap::new(),
            policy: NumericPolicy::DEFAULT,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.options.insert(key.into(), serde_json::to_value(value).expect("option serializes"));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub payload: Value,
    /// Wall-clock seconds; only present when requested, since it breaks
    /// byte-identical output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_seconds: Option<f64>,
}

impl Report {
    pub fn new(config: RunConfig, payload: &impl Serialize) -> Result<Self> {
        let payload = serde_json::to_value(payload).map_err(|e| Error::validation("payload", e.to_string()))?;
        Ok(Report { schema_version: SCHEMA_VERSION, config, payload, timing_seconds: None })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Parse a JSON report, rejecting unknown schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: format!("line {}", e.line()),
            message: e.to_string(),
        })?;
        match raw.get("schema_version").and_then(Value::as_u64) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(Error::validation("schema_version", format!("unsupported version {v}"))),
            None => return Err(Error::validation("schema_version", "missing")),
        }
        serde_path_to_error::deserialize(raw).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// `key,value` rows, one per leaf of the report tree.
    pub fn to_csv(&self) -> String {
        let tree = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        flatten("", &tree, &mut rows);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{},{}", csv_field(&k), csv_field(&v));
        }
        out
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.into()
    }
}

/// Numeric leaves of a CSV rendering, keyed by path.
pub fn csv_numbers(csv: &str) -> BTreeMap<String, f64> {
    csv.lines()
        .skip(1)
        .filter_map(|line| {
            let (k, v) = line.rsplit_once(',')?;
            Some((k.trim_matches('"').to_string(), v.parse().ok()?))
        })
        .collect()
}

/// Numeric leaves of a JSON value, keyed like [`Report::to_csv`].
pub fn json_numbers(v: &Value) -> BTreeMap<String, f64> {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    rows.into_iter().filter_map(|(k, s)| Some((k, s.parse().ok()?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut c = RunConfig::new("capacity", Format::Json);
        c.seed = Some(7);
        c.set("mode", "csi").set("resolution", 64);
        Report::new(c, &serde_json::json!({"value": 0.1 + 0.2, "per_t": [1.0e-300, 3], "label": "a,b"})).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.payload["value"].as_f64(), Some(0.1 + 0.2));
    }

    #[test]
    fn unknown_version_rejected() {
        let text = sample().to_json().replace("\"schema_version\": 1", "\"schema_version\": 9");
        let err = Report::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }

    #[test]
    fn csv_matches_json() {
        let r = sample();
        let csv = r.to_csv();
        assert!(csv.contains("\"a,b\""));
        let tree = serde_json::to_value(&r).unwrap();
        assert_eq!(csv_numbers(&csv), json_numbers(&tree));
        assert_eq!(csv_numbers(&csv)["payload.value"], 0.1 + 0.2);
    }
}
