use std::fmt;

use menuforge_core::Error as CoreError;

/// Failure class; each maps to its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Io,
    Invalid,
    Numerical,
    Unattainable,
}

impl Kind {
    /// 2 is left to the argument parser.
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Io => 3,
            Kind::Invalid => 4,
            Kind::Numerical => 5,
            Kind::Unattainable => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Io => "io",
            Kind::Invalid => "invalid_input",
            Kind::Numerical => "numerical",
            Kind::Unattainable => "unattainable",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Invalid,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError {
            kind: Kind::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind.name(), "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match e {
            CoreError::Unbounded | CoreError::Numerical(_) => Kind::Numerical,
            CoreError::BudgetExceeded { .. } | CoreError::IntersectionUnattainable { .. } => Kind::Unattainable,
            _ => Kind::Invalid,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
