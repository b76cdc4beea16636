//! Flat `key = value` configuration files merged under command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

const KNOWN_KEYS: [&str; 13] = [
    "scenario", "scheme", "n", "cells", "snapshot", "levels", "ref_level", "cfl", "theta",
    "t_final", "out", "seed", "samples",
];

/// Values read from a configuration file; empty when no file was given.
#[derive(Debug, Default)]
pub struct FileSettings {
    values: BTreeMap<String, String>,
}

impl FileSettings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config file {}: {e}", p.display()))
                })?;
                Self::parse(&text)
            }
        }
    }

    /// Blank lines and `#` comments are skipped; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key '{key}' (known: {})",
                    i + 1,
                    KNOWN_KEYS.join(", ")
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the parsed file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    /// Flag values if any were given, else the comma-separated file value.
    pub fn pick_list<T: FromStr>(&self, flags: Vec<T>, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if !flags.is_empty() {
            return Ok(flags);
        }
        match self.values.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nonlocal_cu::Scheme;

    #[test]
    fn flags_override_file_values() {
        let file = FileSettings::parse("# study\ncfl = 0.5\nscheme = cu1, kt\nt-final=0.1\n").unwrap();
        assert_eq!(file.pick(None::<f64>, "cfl").unwrap(), Some(0.5));
        assert_eq!(file.pick(Some(0.25), "cfl").unwrap(), Some(0.25));
        assert_eq!(file.pick(None::<f64>, "t_final").unwrap(), Some(0.1));
        assert_eq!(file.pick(None::<f64>, "theta").unwrap(), None);
        assert_eq!(
            file.pick_list(Vec::<Scheme>::new(), "scheme").unwrap(),
            vec![Scheme::Cu1, Scheme::Kt]
        );
        assert_eq!(file.pick_list(vec![Scheme::Cu2], "scheme").unwrap(), vec![Scheme::Cu2]);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(FileSettings::parse("cfl 0.5").is_err());
        assert!(FileSettings::parse("speed = 3").is_err());
        let file = FileSettings::parse("cfl = fast").unwrap();
        assert!(file.pick(None::<f64>, "cfl").is_err());
    }
}
