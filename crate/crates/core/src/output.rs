//! Tables and their CSV / JSON encodings.
//!
//! CSV floats carry 17 significant digits (`{:.16e}`) so they parse back to
//! the same double; JSON uses shortest round-trip formatting. Files are
//! written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::arg(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Float(x) => x,
        }
    }

    fn csv(self, out: &mut String) {
        match self {
            Cell::Int(i) => write!(out, "{i}").unwrap(),
            Cell::Float(x) if x.is_nan() => out.push_str("NaN"),
            Cell::Float(x) => write!(out, "{x:.16e}").unwrap(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Cell::Int(i) => s.serialize_u64(i),
            Cell::Float(x) if x.is_finite() => s.serialize_f64(x),
            Cell::Float(_) => s.serialize_none(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub task: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: serde_json::Value,
}

struct Rows<'a>(&'a [Vec<Cell>]);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for r in self.0 {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

impl Table {
    pub fn new(task: &str, columns: &[&str]) -> Self {
        Self {
            task: task.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            provenance: serde_json::Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.csv(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "task": self.task,
            "columns": self.columns,
            "rows": Rows(&self.rows),
            "provenance": self.provenance,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parses the output of [`Table::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            task: String,
            columns: Vec<String>,
            rows: Vec<Vec<Option<Cell>>>,
            provenance: serde_json::Value,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| Error::arg(format!("bad table JSON: {e}")))?;
        Ok(Self {
            task: doc.task,
            columns: doc.columns,
            rows: doc
                .rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|c| c.unwrap_or(Cell::Float(f64::NAN)))
                        .collect()
                })
                .collect(),
            provenance: doc.provenance,
        })
    }
}

/// Writes `text` to `path` via a temporary file in the same directory, so the
/// destination either keeps its old content or receives the whole new one.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Renders `table` to `path`, or to standard output when `path` is `None`.
pub fn write_table(table: &Table, format: Format, path: Option<&Path>) -> Result<()> {
    let text = table.render(format);
    match path {
        Some(p) => write_atomic(p, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
