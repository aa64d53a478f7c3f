//! Writers for CSV and JSON result files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::CliError;

pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

impl OutDir {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(OutDir {
            dir,
            written: Vec::new(),
        })
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Rows as `<stem>.csv` or `<stem>.json`, depending on `format`.
    pub fn table<T: Serialize>(&mut self, stem: &str, rows: &[T], format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => self.csv(&format!("{stem}.csv"), rows),
            Format::Json => self.json(&format!("{stem}.json"), &rows),
        }
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}
