//! `convtact.cfg`: plain `key=value` lines. The only key is `auto_threshold`.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use crate::conv::{ConvMethod, DEFAULT_AUTO_THRESHOLD};
use crate::error::{Error, Result};

pub const CONFIG_FILE: &str = "convtact.cfg";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    /// Kernels with fewer elements than this run on the direct backend.
    pub auto_threshold: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { auto_threshold: DEFAULT_AUTO_THRESHOLD }
    }
}

impl Config {
    /// Blank lines and `#` comments are ignored; unknown keys are an error.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
            match key.trim() {
                "auto_threshold" => {
                    let v: usize = value.trim().parse().map_err(|_| {
                        Error::Config(format!("line {}: auto_threshold must be an integer, got {value:?}", i + 1))
                    })?;
                    cfg.auto_threshold = ConvMethod::auto(v).map(|_| v)?;
                }
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", i + 1))),
            }
        }
        Ok(cfg)
    }

    /// Defaults when the file does not exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        match fs::read_to_string(path) {
            Ok(text) => Config::parse(&text),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Config::default()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn to_text(&self) -> String {
        format!("auto_threshold={}\n", self.auto_threshold)
    }

    pub fn method(&self) -> ConvMethod {
        ConvMethod::Auto { threshold: self.auto_threshold }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = Config { auto_threshold: 144 };
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(Config::parse("# host tuned\n\n auto_threshold = 64 \n").unwrap().auto_threshold, 64);
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in ["auto_threshold=abc", "auto_threshold=0", "threshold=5", "auto_threshold"] {
            assert!(matches!(Config::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn missing_file_is_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(CONFIG_FILE);
        assert_eq!(Config::load(&path).unwrap(), Config::default());
        Config { auto_threshold: 10 }.save(&path).unwrap();
        Config { auto_threshold: 12 }.save(&path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "auto_threshold=12\n");
    }
}
