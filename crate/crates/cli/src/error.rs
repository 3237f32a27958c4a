use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Param(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn param(msg: impl Into<String>) -> Self {
        CliError::Param(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Param(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Param(m) => write!(f, "invalid parameters: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<shardprice::Error> for CliError {
    fn from(e: shardprice::Error) -> Self {
        CliError::Param(e.to_string())
    }
}
