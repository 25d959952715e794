//! Tab-separated series files.
//!
//! The first line is a `#`-prefixed header listing every column as
//! `name [unit]`, separated by tabs. Each following line holds one row of
//! numbers in shortest round-trip form, so a file re-parses bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self { name: name.into(), unit: unit.into() }
    }

    fn validate(&self) -> Result<()> {
        let bad = |s: &str| s.is_empty() || s.contains(['\t', '\n', '\r', '[', ']']);
        if bad(&self.name) || self.unit.contains(['\t', '\n', '\r', '[', ']']) {
            return Err(Error::Format(format!("unusable column label `{} [{}]`", self.name, self.unit)));
        }
        Ok(())
    }
}

/// Columns of equal length, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    columns: Vec<Column>,
    data: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Format("a series needs at least one column".into()));
        }
        for c in &columns {
            c.validate()?;
        }
        let data = vec![Vec::new(); columns.len()];
        Ok(Self { columns, data })
    }

    /// Builds a series from whole columns, which must have equal lengths.
    pub fn from_columns(columns: Vec<Column>, data: Vec<Vec<f64>>) -> Result<Self> {
        let mut s = Self::new(columns)?;
        if data.len() != s.columns.len() {
            return Err(Error::Format(format!("{} labels for {} columns", s.columns.len(), data.len())));
        }
        if data.iter().any(|c| c.len() != data[0].len()) {
            return Err(Error::Format("columns differ in length".into()));
        }
        s.data = data;
        Ok(s)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Format(format!("row has {} values, expected {}", row.len(), self.columns.len())));
        }
        for (col, &v) in self.data.iter_mut().zip(row) {
            col.push(v);
        }
        Ok(())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i]
    }

    /// Column by name.
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c.name == name).map(|i| self.data[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.data.iter().map(|c| c[k]).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# ");
        let labels: Vec<String> = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
        out.push_str(&labels.join("\t"));
        out.push('\n');
        for k in 0..self.len() {
            for (i, col) in self.data.iter().enumerate() {
                if i > 0 {
                    out.push('\t');
                }
                write!(out, "{:e}", col[k]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("line 1: header must start with `#`".into()))?;
        let columns = header
            .trim_start_matches(' ')
            .split('\t')
            .map(|label| {
                let (name, unit) = label
                    .strip_suffix(']')
                    .and_then(|l| l.rsplit_once(" ["))
                    .ok_or_else(|| Error::Format(format!("line 1: label `{label}` is not `name [unit]`")))?;
                Ok(Column::new(name, unit))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut series = Self::new(columns)?;
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split('\t')
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", n + 2)))?;
            series.push_row(&row).map_err(|e| Error::Format(format!("line {}: {e}", n + 2)))?;
        }
        Ok(series)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv()).map_err(|e| Error::file(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}
