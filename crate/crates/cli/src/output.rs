//! Write-once output directories, tables and the run manifest.

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;

use crate::config::{config_error, Format, RunConfig};

pub const MANIFEST: &str = "manifest.json";

/// One table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl Cell {
    fn csv(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Missing => String::new(),
        }
    }

    fn json(self) -> serde_json::Value {
        match self {
            Cell::Int(i) => i.into(),
            Cell::Num(v) => {
                serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, Into::into)
            }
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

/// Column-named rows.
#[derive(Debug, Clone)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|c| c.csv()))?;
                }
                Ok(w.into_inner().context("flushing CSV")?)
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|row| {
                        self.headers
                            .iter()
                            .cloned()
                            .zip(row.iter().map(|c| c.json()))
                            .collect()
                    })
                    .collect();
                let mut bytes = serde_json::to_vec_pretty(&rows)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    outputs: &'a [String],
}

/// Output directory that refuses to overwrite anything.
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl OutputDir {
    /// Creates the directory; fails before any work if a previous run left a
    /// manifest there.
    pub fn create(cfg: &RunConfig) -> anyhow::Result<Self> {
        let root = cfg.out().to_path_buf();
        if root.join(MANIFEST).exists() {
            return Err(config_error(format!(
                "{} already holds a run; choose a fresh --out",
                root.display()
            )));
        }
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root,
            format: cfg.format(),
            written: Vec::new(),
        })
    }

    fn write_bytes(&mut self, name: String, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.root.join(&name);
        let mut file = match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                return Err(config_error(format!(
                    "refusing to overwrite {}",
                    path.display()
                )))
            }
            Err(e) => return Err(e).with_context(|| format!("creating {}", path.display())),
        };
        file.write_all(bytes)
            .with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name);
        Ok(())
    }

    /// Writes `<stem>.csv` or `<stem>.json` per the configured format.
    pub fn table(&mut self, stem: &str, table: &Table) -> anyhow::Result<()> {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let bytes = table.render(self.format)?;
        self.write_bytes(format!("{stem}.{ext}"), &bytes)
    }

    /// Writes pretty JSON to `<stem>.json`.
    pub fn json<T: Serialize + ?Sized>(&mut self, stem: &str, value: &T) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(format!("{stem}.json"), &bytes)
    }

    /// Writes the manifest last, so its presence marks a complete run.
    pub fn finish(mut self, cfg: &RunConfig) -> anyhow::Result<PathBuf> {
        let outputs = self.written.clone();
        let manifest = Manifest {
            command: cfg.command.name(),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            outputs: &outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        self.write_bytes(MANIFEST.into(), &bytes)?;
        Ok(self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells_keep_seventeen_digits() {
        let mut t = Table::new(["ell", "value", "gap"]);
        t.push(vec![3usize.into(), (1.0f64 / 3.0).into(), Cell::Missing]);
        let text = String::from_utf8(t.render(Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "ell,value,gap\n3,3.3333333333333331e-1,\n");
        let v: f64 = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }

    #[test]
    fn json_rows_are_objects() {
        let mut t = Table::new(["lambda", "x"]);
        t.push(vec![0.5.into(), Cell::Missing]);
        let v: serde_json::Value =
            serde_json::from_slice(&t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v[0]["lambda"], 0.5);
        assert!(v[0]["x"].is_null());
    }
}
