use std::path::PathBuf;

use kss_core::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: kss_core::Error,
    },
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn core(context: impl Into<String>, source: kss_core::Error) -> Self {
        HarnessError::Core { context: context.into(), source }
    }

    /// Numerical failures inside the algorithms, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, HarnessError::Core { source, .. } if source.kind() == ErrorKind::Numerical)
    }

    /// Process exit status: 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// Attaches a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for kss_core::Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| HarnessError::core(ctx(), e))
    }
}
