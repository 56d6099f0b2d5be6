use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KitError {
    #[error("{}: file not found", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{origin}: unsupported WAV encoding: {detail}")]
    UnsupportedEncoding { origin: String, detail: String },
    #[error("{origin}: truncated {what}")]
    Truncated { origin: String, what: String },
    #[error("{origin}: malformed WAV: {detail}")]
    MalformedWav { origin: String, detail: String },
    #[error("{origin}: malformed VFRF file: {detail}")]
    MalformedFeatures { origin: String, detail: String },
    #[error("{origin}:{line}: {detail}")]
    Parse { origin: String, line: usize, detail: String },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] vfr_core::Error),
}

pub type Result<T, E = KitError> = std::result::Result<T, E>;

impl KitError {
    /// Maps a filesystem error on `path`, keeping "not found" distinct.
    pub fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            Self::NotFound(path.to_path_buf())
        } else {
            Self::Io { path: path.to_path_buf(), source }
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        match source.kind() {
            csv::ErrorKind::Io(e) if e.kind() == io::ErrorKind::NotFound => Self::NotFound(path.to_path_buf()),
            _ => Self::Csv { path: path.to_path_buf(), source },
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| KitError::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| KitError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| KitError::io(path, e))
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}
