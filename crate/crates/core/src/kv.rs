//! Human-readable key-value persistence used for models, reports, and run
//! manifests.
//!
//! One `key = value` pair per line; blank lines and `#` comments are ignored.
//! Every document starts with `format_version = 1` and a `type` field naming
//! the payload. Floats are printed in shortest round-trip form, so a written
//! file parses back to bit-identical values.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: &str = "1";

/// An ordered key-value document.
#[derive(Debug, Clone, Default)]
pub struct KvDoc {
    entries: Vec<(String, String)>,
    index: HashMap<String, usize>,
}

impl KvDoc {
    /// Fresh document carrying the version field and payload type.
    pub fn new(doc_type: &str) -> Self {
        let mut doc = Self::default();
        doc.set("format_version", FORMAT_VERSION);
        doc.set("type", doc_type);
        doc
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        let rendered = value.to_string();
        match self.index.get(key) {
            Some(&i) => self.entries[i].1 = rendered,
            None => {
                self.index.insert(key.to_string(), self.entries.len());
                self.entries.push((key.to_string(), rendered));
            }
        }
    }

    pub fn set_f64_list(&mut self, key: &str, values: &[f64]) {
        let rendered = values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        self.set(key, rendered);
    }

    pub fn set_usize_list(&mut self, key: &str, values: &[usize]) {
        let rendered = values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        self.set(key, rendered);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.index
            .get(key)
            .map(|&i| self.entries[i].1.as_str())
            .ok_or_else(|| Error::KvFormat {
                line: 0,
                msg: format!("missing key '{key}'"),
            })
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let raw = self.get_str(key)?;
        raw.parse().map_err(|_| Error::KvFormat {
            line: 0,
            msg: format!("key '{key}': expected a number, got '{raw}'"),
        })
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let raw = self.get_str(key)?;
        raw.parse().map_err(|_| Error::KvFormat {
            line: 0,
            msg: format!("key '{key}': expected a nonnegative integer, got '{raw}'"),
        })
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        let raw = self.get_str(key)?;
        raw.parse().map_err(|_| Error::KvFormat {
            line: 0,
            msg: format!("key '{key}': expected a nonnegative integer, got '{raw}'"),
        })
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.get_str(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::KvFormat {
                    line: 0,
                    msg: format!("key '{key}': expected numbers, got '{tok}'"),
                })
            })
            .collect()
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.get_str(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::KvFormat {
                    line: 0,
                    msg: format!("key '{key}': expected integers, got '{tok}'"),
                })
            })
            .collect()
    }

    /// Payload type declared in the file.
    pub fn doc_type(&self) -> Result<&str> {
        self.get_str("type")
    }

    /// Fails when the document declares a different payload type.
    pub fn expect_type(&self, expected: &str) -> Result<()> {
        let actual = self.doc_type()?;
        if actual != expected {
            return Err(Error::KvFormat {
                line: 0,
                msg: format!("expected a {expected} file, found '{actual}'"),
            });
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::default();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::KvFormat {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::KvFormat {
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            if doc.contains(key) {
                return Err(Error::KvFormat {
                    line: line_no,
                    msg: format!("duplicate key '{key}'"),
                });
            }
            doc.set(key, value.trim());
        }
        let version = doc.get_str("format_version")?;
        if version != FORMAT_VERSION {
            return Err(Error::KvFormat {
                line: 0,
                msg: format!("unsupported format_version '{version}'"),
            });
        }
        Ok(doc)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(value);
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_values() {
        let mut doc = KvDoc::new("demo");
        doc.set("count", 5usize);
        doc.set("name", "toy");
        doc.set_f64_list("weights", &[0.1, -2.5, 1.0 / 3.0, 1e-300]);
        let text = doc.render();
        let back = KvDoc::parse(&text).unwrap();
        assert_eq!(back.doc_type().unwrap(), "demo");
        assert_eq!(back.get_usize("count").unwrap(), 5);
        assert_eq!(back.get_str("name").unwrap(), "toy");
        assert_eq!(
            back.get_f64_list("weights").unwrap(),
            vec![0.1, -2.5, 1.0 / 3.0, 1e-300]
        );
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "format_version = 1\ntype = demo\nbroken line\n";
        match KvDoc::parse(text).unwrap_err() {
            Error::KvFormat { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn parse_rejects_duplicates_and_bad_versions() {
        let text = "format_version = 1\ntype = demo\nx = 1\nx = 2\n";
        assert!(matches!(
            KvDoc::parse(text).unwrap_err(),
            Error::KvFormat { line: 4, .. }
        ));
        let text = "format_version = 9\ntype = demo\n";
        assert!(KvDoc::parse(text).is_err());
        let text = "type = demo\n";
        assert!(KvDoc::parse(text).is_err());
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# header\nformat_version = 1\n\ntype = demo\n# trailing\n";
        let doc = KvDoc::parse(text).unwrap();
        assert_eq!(doc.doc_type().unwrap(), "demo");
    }

    #[test]
    fn missing_key_is_an_error() {
        let doc = KvDoc::new("demo");
        assert!(doc.get_f64("absent").is_err());
    }
}
