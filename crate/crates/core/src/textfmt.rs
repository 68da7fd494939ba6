//! Plain-text numeric document format shared by chips, readout models and
//! metrics files.
//!
//! A document is a list of `key = value` header lines followed by named
//! blocks. Each block starts with `[name]` and holds comma-separated rows of
//! numbers. Lines starting with `#` are comments. Every float is written in
//! decimal-exponent notation with 17 significant digits, which round-trips
//! an `f64` bit-exactly and does not depend on locale.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits, e.g. `1.6700000000000000e1`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        what: what.to_string(),
        reason: format!("`{}`: {e}", s.trim()),
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NumericDoc {
    pub comments: Vec<String>,
    pub header: Vec<(String, String)>,
    pub blocks: Vec<(String, Vec<Vec<f64>>)>,
}

impl NumericDoc {
    pub fn new(title: &str) -> Self {
        Self {
            comments: vec![title.to_string()],
            ..Self::default()
        }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn push_block(&mut self, name: &str, rows: Vec<Vec<f64>>) {
        self.blocks.push((name.to_string(), rows));
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Parse {
                what: "numeric document".into(),
                reason: format!("missing header key `{key}`"),
            })
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.get(key)?, key)
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let v = self.get(key)?;
        v.parse().map_err(|e| Error::Parse {
            what: key.to_string(),
            reason: format!("`{v}`: {e}"),
        })
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        let v = self.get(key)?;
        v.parse().map_err(|e| Error::Parse {
            what: key.to_string(),
            reason: format!("`{v}`: {e}"),
        })
    }

    pub fn block(&self, name: &str) -> Result<&[Vec<f64>]> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, rows)| rows.as_slice())
            .ok_or_else(|| Error::Parse {
                what: "numeric document".into(),
                reason: format!("missing block `[{name}]`"),
            })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (name, rows) in &self.blocks {
            let _ = writeln!(out, "[{name}]");
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = NumericDoc::default();
        let mut current: Option<(String, Vec<Vec<f64>>)> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                doc.comments.push(c.trim_start().to_string());
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some(b) = current.take() {
                    doc.blocks.push(b);
                }
                current = Some((name.trim().to_string(), Vec::new()));
                continue;
            }
            match current.as_mut() {
                Some((name, rows)) => {
                    let row = line
                        .split(',')
                        .map(|cell| parse_f64(cell, &format!("block `{name}` line {}", lineno + 1)))
                        .collect::<Result<Vec<_>>>()?;
                    rows.push(row);
                }
                None => {
                    let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                        what: "numeric document".into(),
                        reason: format!("line {}: expected `key = value`", lineno + 1),
                    })?;
                    doc.header.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
        }
        if let Some(b) = current.take() {
            doc.blocks.push(b);
        }
        Ok(doc)
    }
}
