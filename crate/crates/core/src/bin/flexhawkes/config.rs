//! Flat key=value config files with CLI-flag overrides, plus the resolved
//! run manifest every command writes for reproducibility.

use flexhawkes::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Resolution order: CLI flag, then config-file entry, then default. Every
/// resolved value is recorded for the manifest.
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = config_path {
            let text = std::fs::read_to_string(path)?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::InvalidParameter(format!(
                        "{}:{}: expected key=value",
                        path.display(),
                        lineno + 1
                    )));
                };
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Resolver { file, resolved: BTreeMap::new() })
    }

    fn record<T: std::fmt::Display>(&mut self, key: &str, value: &T) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::InvalidParameter(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    /// Required value: flag wins, else config, else error.
    pub fn require<T: FromStr + std::fmt::Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.from_file::<T>(key)?.ok_or_else(|| {
                Error::InvalidParameter(format!("missing required parameter: {key}"))
            })?,
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Value with a default.
    pub fn get_or<T: FromStr + std::fmt::Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.from_file::<T>(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Optional value with no default.
    pub fn get_opt<T: FromStr + std::fmt::Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file::<T>(key)?,
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    /// Write `run_manifest.json` capturing the command, crate version, and
    /// every resolved parameter.
    pub fn write_manifest(&self, out_dir: &Path, command: &str) -> Result<()> {
        let manifest = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.resolved,
        });
        let path = out_dir.join("run_manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("json"))?;
        Ok(())
    }
}

pub fn ensure_out_dir(dir: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
