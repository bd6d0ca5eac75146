//! Flat `key = value` configuration text.
//!
//! UTF-8, one assignment per line, `#` starts a comment, SI units. A key
//! ending in `_hz` is an ordinary frequency: it is stored under the key with
//! the suffix stripped and its value multiplied by 2π.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::units::TWO_PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parsed assignments in file order. Later assignments of the same key win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Config {
                    line,
                    reason: format!("invalid key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Config {
                    line,
                    reason: format!("missing value for `{key}`"),
                });
            }
            entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Last raw value for `key`, if present.
    pub fn get_str(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    /// Numeric assignments with `_hz` keys converted to rad/s. Non-numeric
    /// values are skipped here; callers that expect only numbers reject them.
    pub fn numeric(&self) -> Result<BTreeMap<String, (f64, usize)>> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            let Ok(v) = e.value.parse::<f64>() else {
                continue;
            };
            let (key, v) = canonical(&e.key, v);
            out.insert(key, (v, e.line));
        }
        Ok(out)
    }

    /// Parses `value` of entry `e` as a float, with `_hz` conversion.
    pub fn parse_number(e: &Entry) -> Result<(String, f64)> {
        let v: f64 = e.value.parse().map_err(|_| Error::Config {
            line: e.line,
            reason: format!("`{}` is not a number: `{}`", e.key, e.value),
        })?;
        Ok(canonical(&e.key, v))
    }
}

fn canonical(key: &str, v: f64) -> (String, f64) {
    match key.strip_suffix("_hz") {
        Some(base) => (base.to_string(), v * TWO_PI),
        None => (key.to_string(), v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_hz_suffix() {
        let kv = KeyValues::parse(
            "# header\n\nomega_m_hz = 3e6   # mechanical\nchi = 100\nlyapunov_solver = kronecker\n",
        )
        .unwrap();
        let num = kv.numeric().unwrap();
        assert!((num["omega_m"].0 - TWO_PI * 3e6).abs() < 1e-6);
        assert_eq!(num["chi"], (100.0, 4));
        assert!(!num.contains_key("lyapunov_solver"));
        assert_eq!(kv.get_str("lyapunov_solver").unwrap().value, "kronecker");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = KeyValues::parse("chi = 1\nzeta 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        assert!(KeyValues::parse("chi =\n").is_err());
    }

    #[test]
    fn later_assignment_wins() {
        let kv = KeyValues::parse("chi = 1\nchi = 2\n").unwrap();
        assert_eq!(kv.numeric().unwrap()["chi"].0, 2.0);
    }
}
