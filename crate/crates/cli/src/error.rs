use std::fmt;
use std::path::Path;

use serde_json::Value;

/// Process exit status of every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Io = 1,
    Usage = 2,
    NotPayable = 3,
    Provenance = 4,
    Proving = 5,
    Parameter = 6,
    State = 7,
    Rejected = 8,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn label(self) -> &'static str {
        match self {
            Exit::Ok => "ok",
            Exit::Io => "io",
            Exit::Usage => "usage",
            Exit::NotPayable => "not-payable",
            Exit::Provenance => "provenance",
            Exit::Proving => "proving",
            Exit::Parameter => "parameter",
            Exit::State => "state",
            Exit::Rejected => "rejected",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
    /// Printed on stdout in place of the generic error object.
    pub report: Option<Value>,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self { exit, message: message.into(), report: None }
    }

    pub fn with_report(mut self, report: Value) -> Self {
        self.report = Some(report);
        self
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(Exit::Io, format!("{}: {err}", path.display()))
    }

    pub fn to_json(&self) -> Value {
        self.report.clone().unwrap_or_else(|| {
            serde_json::json!({
                "error": self.message,
                "kind": self.exit.label(),
                "exit_code": self.exit.code(),
            })
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.exit.label(), self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
