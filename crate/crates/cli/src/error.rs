use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Lib(#[from] qwgauge::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} check(s) failed")]
    ChecksFailed { failed: usize },
}

impl From<qwgauge::expr::ParseError> for CliError {
    fn from(e: qwgauge::expr::ParseError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl CliError {
    /// 1 for bad input, 2 for failed checks, 3 for anything going wrong at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::ChecksFailed { .. } => 2,
            CliError::Lib(_) | CliError::Io { .. } => 3,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
