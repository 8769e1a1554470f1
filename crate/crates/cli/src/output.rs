//! Writing results to files or stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::inputs::sha256_hex;
use crate::{Failure, Format, InputContext, RuntimeContext};

/// Float in CSV: 17 significant digits, enough to round-trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Destination of a command's outputs. With a directory every output is a
/// file and its digest is kept for the manifest; without one only the
/// primary result is printed.
pub struct Sink {
    dir: Option<PathBuf>,
    format: Format,
    written: BTreeMap<String, String>,
}

impl Sink {
    pub fn new(dir: Option<&Path>, format: Format) -> Result<Self, Failure> {
        if let Some(d) = dir {
            fs::create_dir_all(d).input(&format!("cannot create {}", d.display()))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            format,
            written: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Writes `name` when a directory is set; otherwise does nothing.
    pub fn file(&mut self, name: &str, content: &str) -> Result<(), Failure> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            fs::write(&path, content).runtime(&format!("cannot write {}", path.display()))?;
            self.written
                .insert(name.to_string(), sha256_hex(content.as_bytes()));
        }
        Ok(())
    }

    /// The main result, in the selected format, as `stem.json`/`stem.csv` or on stdout.
    pub fn primary(&mut self, stem: &str, json: &str, csv: &str) -> Result<(), Failure> {
        let (ext, body) = match self.format {
            Format::Json => ("json", json),
            Format::Csv => ("csv", csv),
        };
        if self.dir.is_some() {
            self.file(&format!("{stem}.{ext}"), body)
        } else {
            std::io::stdout()
                .lock()
                .write_all(body.as_bytes())
                .runtime("cannot write to stdout")
        }
    }

    /// File name → SHA-256 of everything written so far.
    pub fn written(&self) -> &BTreeMap<String, String> {
        &self.written
    }
}
