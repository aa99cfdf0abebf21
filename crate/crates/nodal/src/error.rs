use std::fmt;
use std::path::PathBuf;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Schema { path: Option<PathBuf>, errors: Vec<String> },
    Core(nodal_core::Error),
    Io { path: Option<PathBuf>, source: std::io::Error },
    /// A verdict the caller asserted against.
    Assertion(String),
    /// A search or iteration that finished without an answer.
    Numerical(String),
    /// The invariants suite ran and found failures.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Assertion(_) => 4,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: Some(path.into()),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Schema { path, errors } => {
                match path {
                    Some(p) => write!(f, "{} does not match its schema", p.display())?,
                    None => write!(f, "document does not match its schema")?,
                }
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path: Some(p), source } => write!(f, "{}: {source}", p.display()),
            CliError::Io { path: None, source } => write!(f, "{source}"),
            CliError::Assertion(m) => write!(f, "assertion failed: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::ChecksFailed(k) => write!(f, "{k} invariant check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<nodal_core::Error> for CliError {
    fn from(e: nodal_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io { path: None, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
