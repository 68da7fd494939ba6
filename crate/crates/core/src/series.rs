use std::path::Path;

use crate::error::{Error, Result};
use crate::textfmt::{fmt_f64, parse_f64};

/// Uniformly sampled, possibly multi-channel, real-valued sequence.
///
/// Stored channel-major: `values[channel][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    names: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != values.len() || values.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} channel names for {} channels",
                names.len(),
                values.len()
            )));
        }
        let len = values[0].len();
        if values.iter().any(|c| c.len() != len) {
            return Err(Error::DimensionMismatch(
                "channels have different lengths".into(),
            ));
        }
        Ok(Self { names, values })
    }

    pub fn single(name: &str, values: Vec<f64>) -> Self {
        Self {
            names: vec![name.to_string()],
            values: vec![values],
        }
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.values[c]
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        for t in 0..self.len() {
            let row: Vec<String> = self.values.iter().map(|c| fmt_f64(c[t])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse {
            what: "series csv".into(),
            reason: "empty file".into(),
        })?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut values = vec![Vec::new(); names.len()];
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() {
                return Err(Error::Parse {
                    what: "series csv".into(),
                    reason: format!("row {} has {} cells, expected {}", i + 2, cells.len(), names.len()),
                });
            }
            for (c, cell) in cells.iter().enumerate() {
                values[c].push(parse_f64(cell, &names[c])?);
            }
        }
        Self::new(names, values)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
