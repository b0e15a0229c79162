use std::path::{Path, PathBuf};

use polycube_core::{LabelError, MeshError, OperatorError};

/// Everything that maps to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Mesh { path: PathBuf, source: MeshError },
    #[error("{}: {source}", path.display())]
    Label { path: PathBuf, source: LabelError },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("{0}")]
    Usage(String),
}

impl ToolError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ToolError::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        ToolError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }
}
