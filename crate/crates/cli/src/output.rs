use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// Files produced by one command, written together once it succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(name, _)| name.as_str())
    }

    /// Writes each file to a temporary file in `dir`, then renames it into
    /// place, so readers never see a partial file.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let fail = |path: &Path, source| CliError::Write { path: path.to_path_buf(), source };
        std::fs::create_dir_all(dir).map_err(|e| fail(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let target = dir.join(name);
            let mut tmp = NamedTempFile::new_in(dir).map_err(|e| fail(&target, e))?;
            tmp.write_all(contents.as_bytes()).map_err(|e| fail(&target, e))?;
            tmp.as_file().sync_all().map_err(|e| fail(&target, e))?;
            tmp.persist(&target).map_err(|e| fail(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}
