use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
#[error("{op} {path}: {source}")]
pub struct FileError {
    pub op: &'static str,
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

impl FileError {
    pub fn new(op: &'static str, path: &Path, source: io::Error) -> FileError {
        FileError { op, path: path.to_owned(), source }
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FileError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| FileError::new("create temp file for", path, e))?;
    tmp.write_all(bytes).map_err(|e| FileError::new("write", path, e))?;
    // temp files are created owner-only; published outputs should be readable
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(|e| FileError::new("set permissions on", path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| FileError::new("sync", path, e))?;
    tmp.persist(path).map_err(|e| FileError::new("rename into", path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|e| FileError::new("read", path, e))
}
