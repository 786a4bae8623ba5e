//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting, so
//! every value parses back to the same `f64` and the bytes are stable.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Collects the files a command wrote, relative to the output directory.
#[derive(Debug, Default)]
pub struct Written {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Written {
    pub fn new(dir: &Path) -> Self {
        Written {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }
}
