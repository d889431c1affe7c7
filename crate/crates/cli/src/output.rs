use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use tempfile::NamedTempFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Destination for one command's output: stdout, or a file that only
/// appears once everything has been written.
pub struct Sink {
    target: Option<PathBuf>,
}

impl Sink {
    pub fn new(target: Option<PathBuf>) -> Self {
        Self { target }
    }

    /// Runs `write` against a buffer and publishes the result atomically.
    /// Nothing is left behind at the target path if `write` fails.
    pub fn emit<F>(&self, write: F) -> io::Result<()>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        match &self.target {
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
                lock.flush()
            }
            Some(path) => {
                let dir = parent_dir(path);
                let mut tmp = NamedTempFile::new_in(dir)?;
                write(tmp.as_file_mut())?;
                tmp.as_file_mut().flush()?;
                tmp.persist(path).map_err(|e| e.error)?;
                Ok(())
            }
        }
    }

    pub fn rows<R: Serialize>(&self, rows: &[R], format: Format) -> io::Result<()> {
        self.emit(|out| write_rows(out, rows, format))
    }

    pub fn json<V: Serialize>(&self, value: &V) -> io::Result<()> {
        self.emit(|out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            writeln!(out)
        })
    }
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

pub fn write_rows<R: Serialize>(out: &mut dyn Write, rows: &[R], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)
        }
    }
}
