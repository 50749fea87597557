use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use signal_analysis::pipeline::Flag;
use signal_analysis::scalar::round_to;
use tempfile::NamedTempFile;

use crate::args::Format;
use crate::error::CliError;

/// One CSV artifact. The first column carries the schema id; its header
/// cell reads `schema=<id>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub schema: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, schema: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            schema,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let schema_header = format!("schema={}", self.schema);
        let header = std::iter::once(schema_header.as_str()).chain(self.columns.iter().copied());
        w.write_record(header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(std::iter::once(self.schema).chain(row.iter().map(String::as_str)))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }

    fn to_text(&self, out: &mut String) {
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                self.rows
                    .iter()
                    .map(|r| r[i].chars().count())
                    .chain(std::iter::once(c.len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: Vec<&str>, out: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "  {}", padded.join("  ").trim_end());
        };
        let _ = writeln!(out, "{} ({})", self.name, self.schema);
        line(self.columns.clone(), out);
        for r in &self.rows {
            line(r.iter().map(String::as_str).collect(), out);
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub summary: Vec<String>,
    pub tables: Vec<Table>,
    pub flags: Vec<Flag>,
}

impl Output {
    pub fn render_text(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        for s in &self.summary {
            let _ = writeln!(out, "{s}");
        }
        // flags get their own section below
        for t in self.tables.iter().filter(|t| t.name != "flags") {
            out.push('\n');
            t.to_text(&mut out);
        }
        out.push('\n');
        if self.flags.is_empty() {
            out.push_str("flags: none\n");
        } else {
            out.push_str("flags:\n");
            for f in &self.flags {
                let _ = writeln!(out, "  [{}] {}: {}", f.code, f.subject, f.message);
            }
        }
        out
    }

    /// Files to write, as (file name, contents).
    pub fn files(&self, format: Format, title: &str) -> Vec<(String, Vec<u8>)> {
        match format {
            Format::Csv => self
                .tables
                .iter()
                .map(|t| (t.file_name(), t.to_csv()))
                .collect(),
            Format::Text => vec![(format!("{title}.txt"), self.render_text(title).into_bytes())],
        }
    }
}

/// Writes every file to a temp file in `dir` first and renames only once
/// all of them were written, so a failure leaves existing outputs as they
/// were.
pub fn write_atomic(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
        tmp.write_all(bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, target) in staged {
        tmp.persist(&target)
            .map_err(|e| CliError::io(&target, e.error))?;
    }
    Ok(())
}

pub fn write_stdout(files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    for (i, (_, bytes)) in files.iter().enumerate() {
        if i > 0 {
            lock.write_all(b"\n")
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
        lock.write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e))?;
    }
    lock.flush().map_err(|e| CliError::io("<stdout>", e))
}

fn no_negative_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Rounded half away from zero, then printed with exactly `decimals` places.
pub fn fixed(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    format!(
        "{:.*}",
        decimals,
        no_negative_zero(round_to(x, decimals as u32))
    )
}

pub fn opt_fixed(x: Option<f64>, decimals: usize) -> String {
    x.map(|v| fixed(v, decimals)).unwrap_or_default()
}

/// Scientific notation for quantities that may be vanishingly small.
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn flag01(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}
