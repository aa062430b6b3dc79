//! Artifact bookkeeping: CSV tables, JSON documents and the run report.
//!
//! Tables are buffered and written by [`Artifacts::finish`], which runs on
//! both the success and the failure path, so a numeric failure still leaves
//! every completed row on disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

/// Round-trip formatting: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    name: String,
    units: String,
    header: Vec<&'static str>,
    rows: Vec<String>,
}

impl Table {
    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.iter().map(|&v| num(v)).collect::<Vec<_>>().join(","));
    }

    fn render(&self) -> String {
        let mut s = format!("# units: {}\n{}\n", self.units, self.header.join(","));
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

pub struct Artifacts {
    dir: PathBuf,
    tables: Vec<Table>,
    files: Vec<String>,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
}

pub type TableId = usize;

impl Artifacts {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), tables: Vec::new(), files: Vec::new(), results: Map::new(), warnings: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn table(&mut self, name: &str, units: &str, header: &[&'static str]) -> TableId {
        self.tables.push(Table { name: name.to_string(), units: units.to_string(), header: header.to_vec(), rows: Vec::new() });
        self.tables.len() - 1
    }

    pub fn row(&mut self, id: TableId, row: &[f64]) {
        self.tables[id].push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.results.insert(key.to_string(), v);
    }

    /// Append to an array-valued result.
    pub fn append(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        match self.results.entry(key.to_string()).or_insert_with(|| Value::Array(Vec::new())) {
            Value::Array(a) => a.push(v),
            other => *other = Value::Array(vec![v]),
        }
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        log::warn!("{w}");
        self.warnings.push(w);
    }

    /// Write a document now (for large payloads such as Wigner grids).
    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Flush the tables; returns every file name written, sorted.
    pub fn finish(&mut self) -> io::Result<Vec<String>> {
        for t in &self.tables {
            fs::write(self.dir.join(&t.name), t.render())?;
            if !self.files.contains(&t.name) {
                self.files.push(t.name.clone());
            }
        }
        let mut f = self.files.clone();
        f.sort();
        Ok(f)
    }
}

/// Pretty JSON with a trailing newline; key order is sorted, so the text is a
/// function of the value only.
pub fn json_text(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
