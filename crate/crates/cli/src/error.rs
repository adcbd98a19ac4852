use thiserror::Error;

/// Failures of a run, each tied to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),

    #[error("{0}")]
    ResourceLimit(String),

    #[error("{0}")]
    BoundFailed(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::ResourceLimit(_) => 3,
            CliError::BoundFailed(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Invalid(_) => "invalid-argument",
            CliError::ResourceLimit(_) => "resource-limit",
            CliError::BoundFailed(_) => "bound-failed",
            CliError::Io(_) => "io",
        }
    }

    /// One line: `error kind=<kind> exit=<code> message="<text>"`.
    pub fn diagnostic(&self) -> String {
        let text = self.to_string().replace('\\', "\\\\").replace('"', "\\\"");
        let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
        format!(
            "error kind={} exit={} message=\"{text}\"",
            self.kind(),
            self.exit_code()
        )
    }
}

impl From<regretlab::Error> for CliError {
    fn from(e: regretlab::Error) -> Self {
        match e {
            regretlab::Error::ResourceLimit { .. } => CliError::ResourceLimit(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
