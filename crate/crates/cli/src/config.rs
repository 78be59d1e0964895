//! Flat key=value experiment configuration.
//!
//! One `key=value` pair per line; `#` starts a comment. `kind` selects
//! the experiment and `seed` is mandatory. Paths are resolved relative
//! to the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use barron_core::{CoreError, Result};

pub const KNOWN_KINDS: &[&str] = &[
    "norms",
    "interp",
    "link",
    "stability",
    "schroedinger",
    "mc-rate",
    "tikhonov-rate",
    "radon-identity",
];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: String,
    pub seed: u64,
    dir: PathBuf,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Self::parse(&text, dir)
    }

    pub fn parse(text: &str, dir: PathBuf) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CoreError::Parse(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CoreError::Parse(format!("duplicate key '{key}'")));
            }
        }
        let kind = values
            .remove("kind")
            .ok_or_else(|| CoreError::Parse("missing mandatory key 'kind'".into()))?;
        if !KNOWN_KINDS.contains(&kind.as_str()) {
            return Err(CoreError::Parse(format!(
                "unknown kind '{kind}' (expected one of {})",
                KNOWN_KINDS.join(", ")
            )));
        }
        let seed = values
            .remove("seed")
            .ok_or_else(|| CoreError::Parse("missing mandatory key 'seed'".into()))?
            .parse::<u64>()
            .map_err(|e| CoreError::Parse(format!("bad seed: {e}")))?;
        Ok(ExperimentConfig { kind, seed, dir, values })
    }

    pub fn override_seed(&mut self, seed: Option<u64>) {
        if let Some(s) = seed {
            self.seed = s;
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str, raw: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        raw.parse::<T>().map_err(|e| CoreError::Parse(format!("key '{key}': {e}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.raw(key).map_or(Ok(default), |v| self.parse_value(key, v))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.raw(key).map_or(Ok(default), |v| self.parse_value(key, v))
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        self.raw(key).map_or(Ok(default), |v| self.parse_value(key, v))
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64> {
        self.raw(key).map_or(Ok(default), |v| self.parse_value(key, v))
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn list_f64_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v.split(',').map(|item| self.parse_value(key, item.trim())).collect(),
        }
    }

    pub fn list_usize_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v.split(',').map(|item| self.parse_value(key, item.trim())).collect(),
        }
    }

    /// A mandatory path value, resolved relative to the config file.
    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let raw = self
            .raw(key)
            .ok_or_else(|| CoreError::Parse(format!("missing mandatory key '{key}'")))?;
        let p = PathBuf::from(raw);
        Ok(if p.is_absolute() { p } else { self.dir.join(p) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, PathBuf::from("/tmp"))
    }

    #[test]
    fn parses_flat_key_value() {
        let cfg = parse("kind=interp\nseed=7\ncount=100 # trailing comment\n\n# full comment\n")
            .unwrap();
        assert_eq!(cfg.kind, "interp");
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.usize_or("count", 0).unwrap(), 100);
        assert_eq!(cfg.usize_or("absent", 5).unwrap(), 5);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse("kind=interp\nseed=7\nnoequals\n").is_err());
        assert!(parse("kind=interp\nseed=7\nseed=8\n").is_err());
        assert!(parse("kind=interp\n").is_err(), "seed is mandatory");
        assert!(parse("seed=1\n").is_err(), "kind is mandatory");
        assert!(parse("kind=unknown-thing\nseed=1\n").is_err());
        let cfg = parse("kind=interp\nseed=1\ncount=abc\n").unwrap();
        assert!(cfg.usize_or("count", 0).is_err());
    }

    #[test]
    fn parses_lists_and_paths() {
        let cfg = parse("kind=mc-rate\nseed=1\nn_grid=16, 32,64\nfunction=f.txt\n").unwrap();
        assert_eq!(cfg.list_usize_or("n_grid", &[]).unwrap(), vec![16, 32, 64]);
        assert_eq!(cfg.path("function").unwrap(), PathBuf::from("/tmp/f.txt"));
        assert!(cfg.path("absent").is_err());
    }
}
