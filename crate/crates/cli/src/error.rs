use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {message}")]
    Config { message: String, field: Option<String> },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

impl CliError {
    pub fn config(message: impl Into<String>, field: Option<String>) -> Self {
        CliError::Config { message: message.into(), field }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => field.as_deref(),
            _ => None,
        }
    }

    /// 2 for configuration problems, 3 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Config { message, .. } => ("config", message.clone()),
            CliError::Solver(m) => ("solver", m.clone()),
            CliError::Io(m) => ("io", m.clone()),
        };
        serde_json::to_string(&ErrorJson { error: kind, message, field: self.field() }).expect("error json")
    }
}

/// Library errors during a solve or evaluation. Problem construction maps
/// its errors to [`CliError::Config`] explicitly.
impl From<drmco::DrmcoError> for CliError {
    fn from(e: drmco::DrmcoError) -> Self {
        use drmco::DrmcoError as E;
        match e {
            E::Io(_) | E::Json(_) | E::Csv(_) => CliError::Io(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
