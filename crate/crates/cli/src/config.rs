//! `key=value` defaults file. Keys use the long flag names; `_` and `-` are
//! interchangeable. Blank lines and `#` comments are skipped.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Defaults {
    entries: BTreeMap<String, String>,
}

impl Defaults {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = normalize(key);
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("config key `{key}` given twice")));
            }
        }
        Ok(Self { entries })
    }

    /// Fails on any key outside `allowed`.
    pub fn restrict(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown config key `{k}` (allowed: {})", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    pub fn scalar<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.entries
            .get(key)
            .map(|v| v.parse().map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    pub fn list<T: FromStr>(&self, flag: Option<Vec<T>>, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        let Some(v) = self.entries.get(key) else { return Ok(None) };
        v.split(',')
            .map(|item| item.trim().parse().map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}
