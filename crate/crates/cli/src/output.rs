//! CSV emission, atomic file writes and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const RESULT_CSV: &str = "result.csv";
pub const RESULT_JSON: &str = "result.json";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Comma-delimited text with a header row and LF line endings.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Self { text: String::new() };
        csv.row(header.iter().map(|h| h.as_ref().to_string()).collect());
        csv
    }

    pub fn row(&mut self, fields: Vec<String>) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    /// Seventeen significant digits, enough to round-trip any `f64`.
    pub fn float(x: f64) -> String {
        if x.is_finite() {
            format!("{x:.16e}")
        } else {
            x.to_string()
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub wall_clock_seconds: f64,
    pub tolerances: BTreeMap<String, Value>,
    pub files: Vec<String>,
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    let fail = |source| CliError::Write {
        path: path.clone(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(&path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
