//! Atomic artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place, so readers never see a partial file.
    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        {
            let mut w = std::io::BufWriter::new(tmp.as_file_mut());
            f(&mut w)?;
            w.flush()?;
        }
        tmp.as_file().sync_all()?;
        let target = self.dir.join(name);
        tmp.persist(&target).with_context(|| format!("writing {}", target.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_str(&mut self, name: &str, s: &str) -> anyhow::Result<()> {
        self.write_with(name, |w| Ok(w.write_all(s.as_bytes())?))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write_str(name, &s)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub metrics: Map<String, Value>,
    pub invariants: BTreeMap<String, bool>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn all_invariants_hold(&self) -> bool {
        self.invariants.values().all(|&ok| ok)
    }
}
