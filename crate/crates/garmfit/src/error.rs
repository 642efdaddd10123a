use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] garmfit_core::Error),
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, msg: impl ToString) -> Self {
        Error::Parse { path: path.to_path_buf(), msg: msg.to_string() }
    }

    pub fn format(path: &Path, msg: impl ToString) -> Self {
        Error::Format { path: path.to_path_buf(), msg: msg.to_string() }
    }

    /// Process exit status: 1 for bad input, 2 for failures inside the
    /// pipeline.
    pub fn exit_code(&self) -> i32 {
        use garmfit_core::Error as C;
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. } | Error::Config(_) => 1,
            Error::Core(C::Singular(_) | C::Rasterization(_)) | Error::Internal(_) => 2,
            Error::Core(_) => 1,
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
