//! Flat `key = value` configuration merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};

/// Keys that locate files rather than describe the experiment; they are left
/// out of the manifest so reruns elsewhere produce the same bytes.
const LOCATION_KEYS: &[&str] = &["out", "config"];

/// Resolved parameters: the config file first, flags on top.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

/// A parameter that is present but malformed or out of range.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationError {}

fn invalid(msg: String) -> anyhow::Error {
    anyhow::Error::new(ValidationError(msg))
}

pub fn parse_config(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(invalid(format!("config line {}: expected key = value", lineno + 1)));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(invalid(format!("config line {}: empty key", lineno + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Params {
    pub fn load(config: Option<&Path>, flags: Vec<(&'static str, Option<String>)>) -> anyhow::Result<Self> {
        let mut values = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Params { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|e| invalid(format!("--{key} {s:?}: {e}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> anyhow::Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> anyhow::Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| invalid(format!("missing required parameter --{key}")))
    }

    /// A comma-separated list of numbers.
    pub fn list_f64(&self, key: &str) -> anyhow::Result<Option<Vec<f64>>> {
        let Some(s) = self.values.get(key) else { return Ok(None) };
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| invalid(format!("--{key} {p:?}: {e}"))))
            .collect::<anyhow::Result<Vec<_>>>()
            .map(Some)
    }

    /// Everything except file locations, for the manifest.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.iter().filter(|(k, _)| !LOCATION_KEYS.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

pub fn check(cond: bool, msg: impl FnOnce() -> String) -> anyhow::Result<()> {
    if !cond {
        bail!(ValidationError(msg()));
    }
    Ok(())
}
