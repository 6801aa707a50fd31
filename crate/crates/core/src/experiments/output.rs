//! Tabular results, CSV emission and run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Column-oriented result table written as one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    columns: Vec<(String, Vec<String>)>,
    /// Optional line plot: x column and y columns.
    pub plot: Option<PlotSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub ys: Vec<String>,
    pub y_label: String,
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip representation; stable across platforms
    format!("{v}")
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            columns: vec![],
            plot: None,
        }
    }

    fn push(&mut self, name: impl Into<String>, cells: Vec<String>) -> Result<()> {
        let name = name.into();
        if let Some((_, first)) = self.columns.first() {
            if first.len() != cells.len() {
                return Err(Error::dim(first.len(), cells.len()));
            }
        }
        if self.columns.iter().any(|(n, _)| *n == name) {
            return Err(Error::config(format!("duplicate column `{name}` in table `{}`", self.name)));
        }
        self.columns.push((name, cells));
        Ok(())
    }

    pub fn f64_col(&mut self, name: impl Into<String>, values: &[f64]) -> Result<&mut Self> {
        self.push(name, values.iter().map(|&v| fmt_f64(v)).collect())?;
        Ok(self)
    }

    pub fn i64_col(&mut self, name: impl Into<String>, values: &[i64]) -> Result<&mut Self> {
        self.push(name, values.iter().map(|v| v.to_string()).collect())?;
        Ok(self)
    }

    pub fn str_col<S: ToString>(&mut self, name: impl Into<String>, values: &[S]) -> Result<&mut Self> {
        self.push(name, values.iter().map(|v| v.to_string()).collect())?;
        Ok(self)
    }

    /// Plots every numeric column except `x` against `x`.
    pub fn with_plot(&mut self, x: &str, y_label: &str) -> &mut Self {
        let ys = self.columns.iter().map(|(n, _)| n.clone()).filter(|n| n != x).collect();
        self.plot = Some(PlotSpec {
            x: x.into(),
            ys,
            y_label: y_label.into(),
        });
        self
    }

    pub fn headers(&self) -> Vec<&str> {
        self.columns.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Numeric view of a column; unparsable cells become NaN.
    pub fn numeric(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)
            .map(|c| c.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(self.headers())?;
        for r in 0..self.rows() {
            w.write_record(self.columns.iter().map(|(_, c)| c[r].as_str()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// One emitted file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub description: String,
    pub seed: u64,
    pub version: String,
    /// Fully merged configuration.
    pub config: ExperimentConfig,
    pub workers: usize,
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn checksum(&self, path: &str) -> Option<&str> {
        self.files.iter().find(|f| f.path == path).map(|f| f.sha256.as_str())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `dir/name` and returns its record.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileRecord> {
    let path: PathBuf = dir.join(name);
    std::fs::write(&path, bytes)?;
    Ok(FileRecord {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("t");
        t.i64_col("lag", &[0, 1]).unwrap().f64_col("v", &[0.5, -1e-3]).unwrap();
        let s = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(s, "lag,v\n0,0.5\n1,-0.001\n");
    }

    #[test]
    fn ragged_and_duplicate_columns_rejected() {
        let mut t = Table::new("t");
        t.f64_col("a", &[1.0]).unwrap();
        assert!(t.f64_col("b", &[1.0, 2.0]).is_err());
        assert!(t.f64_col("a", &[1.0]).is_err());
    }

    #[test]
    fn checksum_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
