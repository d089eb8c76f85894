use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Files written into one output directory. Unless [`Self::commit`] is
/// called, dropping the set removes everything it wrote, and the directory
/// itself if the set created it.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}
