use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::CliError;

/// Envelope of every JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary<T> {
    pub command: String,
    pub config: RunConfig,
    pub result: T,
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(path: &str) -> Result<Self, CliError> {
        fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        Ok(OutDir { root: PathBuf::from(path) })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Write to a temporary file in the same directory, then rename.
    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let target = self.path(name);
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", target.display()));
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(io)?;
        tmp.write_all(contents.as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&target).map_err(|e| io(e.error))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, summary: &Summary<T>) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn write_config(&self, config: &RunConfig) -> Result<PathBuf, CliError> {
        let text = toml::to_string(config).map_err(|e| CliError::Io(e.to_string()))?;
        self.write("run.toml", &text)
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell, quoted when it holds a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv { text: String::new() };
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().map(|c| csv_field(&c)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push_str("\r\n");
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -7.25e17, 1.0 / 22.0f64.sqrt()] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_quotes_only_when_needed() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(["x,y".to_string(), "say \"hi\"".to_string()]);
        assert_eq!(c.finish(), "a,b\r\n\"x,y\",\"say \"\"hi\"\"\"\r\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutDir::create(dir.path().to_str().unwrap()).unwrap();
        out.write("a.txt", "one").unwrap();
        out.write("a.txt", "two").unwrap();
        assert_eq!(fs::read_to_string(out.path("a.txt")).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
