//! Flat key=value configuration files with flag overrides, and the resolved
//! configuration echo that heads every output.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use substrace_core::error::{CodecError, Result};

/// Key=value pairs from an optional config file; lines starting with '#'
/// and blank lines are ignored.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CodecError::Io(format!("{}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(CodecError::Io(format!(
                        "{}:{}: expected key=value",
                        path.display(),
                        lineno + 1
                    )));
                };
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileConfig { values })
    }

    /// Flag value if given, else the config-file value, else None.
    pub fn resolve<T: FromStr + Clone>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CodecError::params(format!("config key {key}: bad value '{raw}'"))),
            None => Ok(None),
        }
    }

    pub fn require<T: FromStr + Clone>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.resolve(flag, key)?
            .ok_or_else(|| CodecError::params(format!("missing required parameter: --{key}")))
    }
}

/// Resolved configuration echoed into every output for reproducibility.
#[derive(Debug, Default)]
pub struct Echo {
    entries: Vec<(String, String)>,
}

impl Echo {
    pub fn new(command: &str) -> Self {
        Echo { entries: vec![("command".into(), command.into())] }
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn extend(&mut self, kv: impl IntoIterator<Item = (String, String)>) {
        self.entries.extend(kv);
    }

    pub fn header(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}
