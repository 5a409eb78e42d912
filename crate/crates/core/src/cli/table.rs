//! Column-oriented tables and their CSV form: `#` metadata lines, a header
//! row, then one row per sample with floats at 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    /// Printed as `0`/`1` instead of a float.
    pub flag: bool,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column { name: name.into(), values, flag: false }
    }

    pub fn flags(name: impl Into<String>, values: impl IntoIterator<Item = bool>) -> Self {
        let values = values.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
        Column { name: name.into(), values, flag: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File name inside the output directory.
    pub file: String,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(file: impl Into<String>) -> Self {
        Table { file: file.into(), columns: Vec::new() }
    }

    pub fn push(&mut self, column: Column) -> Result<()> {
        if let Some(first) = self.columns.first() {
            if first.values.len() != column.values.len() {
                return Err(Error::DimensionMismatch { left: first.values.len(), right: column.values.len() });
            }
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// CSV text with `metadata` lines prefixed by `# `.
    pub fn to_csv(&self, metadata: &[String]) -> String {
        let mut out = String::new();
        for line in metadata {
            let _ = writeln!(out, "# {line}");
        }
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in 0..self.rows() {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let v = col.values[row];
                if col.flag {
                    out.push(if v != 0.0 { '1' } else { '0' });
                } else {
                    let _ = write!(out, "{v:.16e}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, metadata: &[String]) -> Result<std::path::PathBuf> {
        let path = dir.join(&self.file);
        std::fs::write(&path, self.to_csv(metadata))?;
        Ok(path)
    }
}
