use std::fmt;

/// Failure categories reported as JSON on standard error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Validation { field: String, message: String },
    Io(String),
    Runtime(qkonc_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Validation { .. } => "validation",
            CliError::Io(_) => "io",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) | CliError::Io(_) => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Validation { field, .. } = self {
            v["field"] = field.clone().into();
        }
        v
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Io(m) => f.write_str(m),
            CliError::Validation { field, message } => write!(f, "{field}: {message}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<qkonc_core::Error> for CliError {
    fn from(e: qkonc_core::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
