use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Output files collected in memory and written together. Each file goes
/// through a temporary file next to its target and a rename; if any
/// step fails, files already placed are removed again.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut placed: Vec<PathBuf> = Vec::new();
        let mut made_dirs: Vec<PathBuf> = Vec::new();
        let result = self.files.iter().try_for_each(|(name, contents)| {
            let target = dir.join(name);
            let parent = target.parent().unwrap_or(dir).to_path_buf();
            if !parent.exists() {
                fs::create_dir_all(&parent).map_err(|e| CliError::io(&parent, e))?;
                made_dirs.push(parent.clone());
            }
            let mut tmp = NamedTempFile::new_in(&parent).map_err(|e| CliError::io(&parent, e))?;
            tmp.write_all(contents.as_bytes())
                .and_then(|_| tmp.as_file().sync_all())
                .map_err(|e| CliError::io(&target, e))?;
            tmp.persist(&target)
                .map_err(|e| CliError::io(&target, e.error))?;
            placed.push(target);
            Ok(())
        });
        if let Err(e) = result {
            for p in &placed {
                let _ = fs::remove_file(p);
            }
            for d in made_dirs.iter().rev() {
                let _ = fs::remove_dir(d);
            }
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            return Err(e);
        }
        Ok(placed)
    }
}
