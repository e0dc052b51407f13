use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("selftest failed: {0}")]
    Selftest(String),
    #[error("forward solver quality: {0}")]
    Quality(String),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Io(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Selftest(_) => 1,
            CliError::Quality(_) => 2,
            CliError::Parse { .. } | CliError::Io(_) => 3,
            CliError::Config(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<elastic_esm::Error> for CliError {
    fn from(e: elastic_esm::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
