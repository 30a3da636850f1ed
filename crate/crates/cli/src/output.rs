use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

/// Files a command produces, held in memory until everything succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Sidecar `<stem>.json` with pretty-printed `record` and a trailing newline.
    pub fn add_json<T: Serialize>(&mut self, name: &str, record: &T) -> Result<(), CliError> {
        let mut bytes =
            serde_json::to_vec_pretty(record).map_err(|e| CliError::io(format!("cannot encode {name}: {e}")))?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Writes each file to a temporary sibling and renames it into place.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let mut tmp = NamedTempFile::new_in(dir)
                .map_err(|e| CliError::io(format!("cannot stage {name} in {}: {e}", dir.display())))?;
            tmp.write_all(bytes)
                .and_then(|_| tmp.as_file().sync_all())
                .map_err(|e| CliError::io(format!("cannot write {name}: {e}")))?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target)
                .map_err(|e| CliError::io(format!("cannot move {} into place: {e}", target.display())))?;
            written.push(target);
        }
        Ok(written)
    }
}
