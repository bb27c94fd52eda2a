use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("not found: {0}")]
    NotFound(String),
    #[error(transparent)]
    Core(#[from] cueval_core::Error),
}

impl CliError {
    /// Process exit code: 2 config, 3 I/O or malformed input, 4 not found.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(cueval_core::Error::InvalidConfig(_)) => 2,
            CliError::Core(cueval_core::Error::InvalidBody(_)) => 2,
            CliError::Core(cueval_core::Error::InvalidLimits(_)) => 2,
            CliError::Io { .. } | CliError::Format { .. } | CliError::Core(_) => 3,
            CliError::NotFound(_) => 4,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Format {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Write a file, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
