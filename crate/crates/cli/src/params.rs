use std::collections::BTreeMap;

use crate::CliError;

/// Model parameters as raw strings. Files use `key = value` lines with `#`
/// comments; `--param key=value` entries are merged on top.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    entries: BTreeMap<String, String>,
}

impl ParamSet {
    pub fn parse_file(text: &str) -> Result<Self, CliError> {
        let mut set = ParamSet::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            set.insert_assignment(line)
                .map_err(|e| CliError::Spec(format!("line {}: {e}", n + 1)))?;
        }
        Ok(set)
    }

    /// Adds one `key=value` entry, replacing an earlier value for the key.
    pub fn insert_assignment(&mut self, text: &str) -> Result<(), CliError> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| CliError::Spec(format!("expected key=value, got `{text}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Spec(format!("empty key or value in `{text}`")));
        }
        self.entries.insert(k.to_string(), v.to_string());
        Ok(())
    }

    pub fn merge(&mut self, other: &ParamSet) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fails on the first key not in `allowed`.
    pub fn only(&self, allowed: &[&str], model: &str) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Spec(format!(
                "unknown parameter `{k}` for {model} (expected one of: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            Some(v) => parse_f64(key, v),
            None => Ok(default),
        }
    }

    pub fn f64_required(&self, key: &str) -> Result<f64, CliError> {
        let v = self
            .raw(key)
            .ok_or_else(|| CliError::Spec(format!("missing parameter `{key}`")))?;
        parse_f64(key, v)
    }

    pub fn list_required(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self
            .raw(key)
            .ok_or_else(|| CliError::Spec(format!("missing parameter `{key}`")))?;
        parse_list(key, v)
    }
}

pub fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Spec(format!("`{key}`: `{v}` is not a number")))
}

/// Comma separated numbers, e.g. `-0.5,1,1.2`.
pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|p| parse_f64(key, p)).collect()
}
