use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Bad flags, config keys or values; the binary exits with status 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Keys accepted in a config file; they match the long flag names.
const KNOWN_KEYS: &[&str] = &[
    "dim",
    "mass",
    "tol",
    "samples",
    "out",
    "mode",
    "t-end",
    "all-dims",
    "crossing-demo",
    "emin-offset-min",
    "emin-offset-max",
    "input",
    "fixture",
    "level",
    "shape-a",
    "shape-b",
    "support-radius",
    "nodes",
    "energy-offset",
    "radius",
    "velocity",
    "inward",
    "mass-b",
    "labels",
    "dt",
];

/// Flat `key = value` file. Blank lines and `#` comments are skipped;
/// underscores in keys are read as dashes.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| UsageError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(UsageError(format!("line {}: unknown key `{key}`", i + 1)));
            }
            let value = value.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), (i + 1, value)).is_some() {
                return Err(UsageError(format!("line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the parsed config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, UsageError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| UsageError(format!("line {line}: invalid value `{raw}` for `{key}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let cfg = ConfigFile::parse("# comment\ndim = 5\nmass=2.5 # trailing\n\n").unwrap();
        assert_eq!(cfg.pick(None::<u32>, "dim").unwrap(), Some(5));
        assert_eq!(cfg.pick(Some(3u32), "dim").unwrap(), Some(3));
        assert_eq!(cfg.pick(None::<f64>, "mass").unwrap(), Some(2.5));
        assert_eq!(cfg.pick(None::<f64>, "tol").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("dimension = 3").is_err());
        assert!(ConfigFile::parse("dim 3").is_err());
        assert!(ConfigFile::parse("dim = 3\ndim = 4").is_err());
        let cfg = ConfigFile::parse("dim = three").unwrap();
        assert!(cfg.pick(None::<u32>, "dim").is_err());
    }

    #[test]
    fn underscores_are_dashes() {
        let cfg = ConfigFile::parse("t_end = 4").unwrap();
        assert_eq!(cfg.pick(None::<f64>, "t-end").unwrap(), Some(4.0));
    }
}
