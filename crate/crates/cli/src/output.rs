//! Deterministic CSV/JSON writers that embed the provenance block.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Bumped whenever a column or key changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
}

pub struct Writer<'a> {
    pub dir: PathBuf,
    pub provenance: Provenance<'a>,
}

impl<'a> Writer<'a> {
    pub fn new(dir: &Path, provenance: Provenance<'a>) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), provenance })
    }

    fn create(&self, name: &str) -> Result<fs::File, CliError> {
        let path = self.dir.join(name);
        fs::File::create(&path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }

    /// `{"provenance": ..., <body fields>}`, pretty printed.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Doc<'b, T> {
            provenance: &'b Provenance<'b>,
            #[serde(flatten)]
            body: &'b T,
        }
        let mut text = serde_json::to_string_pretty(&Doc { provenance: &self.provenance, body })
            .map_err(|e| CliError::Numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.create(name)?
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write {name}: {e}")))
    }

    /// One `# provenance: {...}` comment line, then a header and rows.
    pub fn csv<R: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Config(format!("cannot write {name}: {e}"));
        let mut file = self.create(name)?;
        let line = serde_json::to_string(&self.provenance)
            .map_err(|e| CliError::Numerical(format!("cannot serialize provenance: {e}")))?;
        writeln!(file, "# provenance: {line}").map_err(io)?;
        let mut w = csv::Writer::from_writer(file);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Config(format!("cannot write {name}: {e}")))?;
        }
        w.flush().map_err(io)
    }
}
