use finsler_core::Error as CoreError;

/// Failures of a CLI run, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error at {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{module}/{operation}: {source}")]
    Core {
        module: &'static str,
        operation: &'static str,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn schema(path: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError::Schema { path: path.into(), detail: detail.into() }
    }

    pub fn core(module: &'static str, operation: &'static str) -> impl Fn(CoreError) -> Self {
        move |source| CliError::Core { module, operation, source }
    }

    /// 1 for a failed mathematical check, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => match source {
                CoreError::FormulaViolation { .. }
                | CoreError::InconsistentVerdicts(_)
                | CoreError::OracleFailure(_)
                | CoreError::OrderExceeded { .. }
                | CoreError::DepthUnavailable { .. } => 1,
                _ => 2,
            },
            CliError::Io { .. } => 2,
            CliError::Parse(_) | CliError::Schema { .. } => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
