//! One-file-per-key response cache.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Content-addressed store rooted at a directory. Each namespace is a
/// subdirectory; each entry is a file named after its key.
#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(DiskCache { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, namespace: &str, key: &str, ext: &str) -> PathBuf {
        self.root.join(namespace).join(format!("{key}.{ext}"))
    }

    pub fn get(&self, namespace: &str, key: &str, ext: &str) -> Result<Option<String>> {
        match fs::read_to_string(self.path(namespace, key, ext)) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::Io(e)),
        }
    }

    /// Writes through a temporary file and renames it into place, so readers
    /// never observe a partial entry. An existing entry is left untouched.
    pub fn put(&self, namespace: &str, key: &str, ext: &str, value: &str) -> Result<()> {
        let target = self.path(namespace, key, ext);
        if target.exists() {
            return Ok(());
        }
        let dir = self.root.join(namespace);
        fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(value.as_bytes())?;
        tmp.flush()?;
        tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}
