//! Output files. Every file opens with the run header; CSV tables follow it
//! with LF line endings, JSON summaries carry it as their first key.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl RunHeader {
    pub fn new(seed: u64, config_bytes: &[u8]) -> Self {
        let digest = Sha256::digest(config_bytes);
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed,
            config_sha256,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} seed={} config_sha256={}",
            self.tool, self.version, self.seed, self.config_sha256
        )
    }
}

/// An in-memory CSV table.
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, header: &RunHeader) -> Result<Vec<u8>> {
        let mut out = format!("# {}\n", header.line()).into_bytes();
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut out);
            w.write_record(&self.columns).map_err(csv_err)?;
            for r in &self.rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(|e| io_err(e.to_string()))?;
        }
        Ok(out)
    }
}

fn io_err(msg: String) -> Error {
    Error::Io(std::io::Error::other(msg))
}

fn csv_err(e: csv::Error) -> Error {
    io_err(e.to_string())
}

/// A CSV cell. Reals use the shortest round-trip form; absent values are empty.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        if self.is_finite() {
            ryu::Buffer::new().format_finite(*self).to_string()
        } else {
            self.to_string()
        }
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_cell!(usize, u64, bool, String, &str);

impl<X: Cell> Cell for Option<X> {
    fn cell(&self) -> String {
        self.as_ref().map(Cell::cell).unwrap_or_default()
    }
}

pub fn cell(x: impl Cell) -> String {
    x.cell()
}

#[derive(Serialize)]
struct Summary<'a, S: Serialize> {
    header: &'a RunHeader,
    #[serde(flatten)]
    body: &'a S,
}

pub fn render_json<S: Serialize>(header: &RunHeader, body: &S) -> Result<Vec<u8>> {
    let mut out =
        serde_json::to_vec_pretty(&Summary { header, body }).map_err(|e| io_err(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes outputs into one directory and remembers their names.
pub struct OutputDir {
    root: PathBuf,
    header: RunHeader,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, header: RunHeader) -> Result<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| io_err(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            header,
            written: Vec::new(),
        })
    }

    pub fn header(&self) -> &RunHeader {
        &self.header
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| io_err(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let bytes = table.render(&self.header)?;
        self.put(name, &bytes)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, body: &S) -> Result<()> {
        let bytes = render_json(&self.header, body)?;
        self.put(name, &bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_quoting() {
        let h = RunHeader::new(7, b"{}");
        assert_eq!(
            h.config_sha256,
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        );
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), cell(0.5)]);
        assert_eq!(cell(1e-10), "1e-10");
        assert_eq!(cell(None::<f64>), "");
        let s = String::from_utf8(t.render(&h).unwrap()).unwrap();
        let mut lines = s.lines();
        assert!(lines.next().unwrap().starts_with("# entropy-lab "));
        assert_eq!(lines.next(), Some("a,b"));
        assert_eq!(lines.next(), Some("\"x,y\",0.5"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn json_leads_with_header() {
        #[derive(Serialize)]
        struct B {
            passed: bool,
        }
        let h = RunHeader::new(1, b"x");
        let v: serde_json::Value =
            serde_json::from_slice(&render_json(&h, &B { passed: true }).unwrap()).unwrap();
        assert_eq!(v["header"]["seed"], 1);
        assert_eq!(v["passed"], true);
        let s = String::from_utf8(render_json(&h, &B { passed: true }).unwrap()).unwrap();
        assert!(s.lines().nth(1).unwrap().contains("\"header\""));
    }
}
