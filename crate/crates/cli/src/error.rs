use pba_core::Error as CoreError;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("method inapplicable: {0}")]
    Inapplicable(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Input(_) => 2,
            CliError::Inapplicable(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Input(_) => "ValidationError",
            CliError::Inapplicable(_) => "MethodInapplicable",
            CliError::Internal(_) => "InternalError",
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NotAForest(_)
            | CoreError::NoRunningIntersectionOrder(_)
            | CoreError::WrongTopology(_)
            | CoreError::KsPropertyRequired(_)
            | CoreError::PropertyGViolated(_)
            | CoreError::LimitExceeded(_)
            | CoreError::ArityTooLarge { .. } => CliError::Inapplicable(msg),
            CoreError::InternalInconsistency(_) | CoreError::InfeasibleBase => CliError::Internal(msg),
            _ => CliError::Input(msg),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
