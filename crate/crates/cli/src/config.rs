use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::UsageError;

/// An angle in radians, written as a number or as a multiple of `pi`
/// such as `pi/4`, `-pi/2`, `3pi/4` or `2*pi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim().to_ascii_lowercase();
        if let Ok(v) = text.parse::<f64>() {
            return Ok(Angle(v));
        }
        let bad = || format!("cannot parse angle {s:?}; use radians or a form like pi/4");
        let (sign, body) = match text.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, text.strip_prefix('+').unwrap_or(&text)),
        };
        let (numerator, denominator) = match body.split_once('/') {
            Some((n, d)) => (n, d.trim().parse::<f64>().map_err(|_| bad())?),
            None => (body, 1.0),
        };
        let factor = numerator.trim().strip_suffix("pi").ok_or_else(bad)?;
        let factor = factor.trim().trim_end_matches('*').trim();
        let factor = if factor.is_empty() {
            1.0
        } else {
            factor.parse::<f64>().map_err(|_| bad())?
        };
        if denominator == 0.0 {
            return Err(bad());
        }
        Ok(Angle(sign * factor * std::f64::consts::PI / denominator))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Reads a JSON object of parameters.
pub fn load_config(path: &Path) -> anyhow::Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(UsageError(format!("config {} must hold a JSON object", path.display())).into()),
        Err(e) => Err(UsageError(format!("config {} is not valid JSON: {e}", path.display())).into()),
    }
}

/// Overlays flag values onto config-file values and deserializes the result.
pub fn resolve<T: DeserializeOwned>(base: Map<String, Value>, layers: &[Value]) -> anyhow::Result<T> {
    let mut merged = base;
    for layer in layers {
        if let Value::Object(map) = layer {
            for (k, v) in map {
                merged.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| UsageError(format!("invalid configuration: {e}")).into())
}

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every command.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Globals {
    pub seed: u64,
    pub threads: usize,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}
