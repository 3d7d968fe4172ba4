use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error at {path}: {message}")]
    Input { path: String, message: String },

    #[error("{0}")]
    Compute(String),

    #[error("{failed} reproduction item(s) failed")]
    ReproFailed { failed: usize },
}

impl CliError {
    pub fn input(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Compute(_) | CliError::ReproFailed { .. } => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let body = match self {
            CliError::Input { path, message } => {
                json!({"kind": "input", "path": path, "message": message})
            }
            CliError::Compute(message) => json!({"kind": "computation", "message": message}),
            CliError::ReproFailed { failed } => json!({
                "kind": "computation",
                "message": self.to_string(),
                "failed": failed,
            }),
        };
        json!({ "error": body })
    }
}

impl From<steinlab::Error> for CliError {
    fn from(e: steinlab::Error) -> Self {
        match e {
            steinlab::Error::Input { path, message } => CliError::Input { path, message },
            other if other.is_input_error() => CliError::input("$", other.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
