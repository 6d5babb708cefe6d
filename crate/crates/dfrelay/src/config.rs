//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes (`snr-db`,
//! `block-size`, ...); underscores are accepted in place of dashes. Blank
//! lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{AppError, AppResult};

/// Keys a configuration file may set.
pub const KEYS: &[&str] = &[
    "relays",
    "hops",
    "snr-db",
    "strategy",
    "window",
    "block-size",
    "windows",
    "trials",
    "seed",
    "users",
    "threads",
    "output",
    "format",
    "optimal-approx",
    "dump-terms",
];

/// Parsed configuration, keyed by canonical flag name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text).map_err(|(line, message)| AppError::ConfigFile {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    /// Parses file contents; errors carry a 1-based line number.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err((n + 1, format!("expected key=value, got `{line}`")));
            };
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err((n + 1, format!("unknown key `{key}`")));
            }
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            if map.insert(key.clone(), value.to_string()).is_some() {
                return Err((n + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(ConfigMap(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Renders pairs as a configuration file that [`ConfigMap::parse`] reads back.
pub fn render(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
