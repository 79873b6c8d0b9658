use std::path::Path;

use bergman_extremal::Error;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{failed} acceptance criteria failed")]
    SuiteFailed { failed: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(Error::BudgetExceeded { .. }) => 3,
            Self::Core(_) | Self::Config(_) => 2,
            Self::SuiteFailed { .. } => 4,
            Self::Io { .. } => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Core(e) => match e {
                Error::HypothesisViolation(_) => "hypothesis_violation",
                Error::UnsupportedDimension(_) => "unsupported_dimension",
                Error::OutOfDomain(_) => "out_of_domain",
                Error::BudgetExceeded { .. } => "budget_exceeded",
                Error::InsufficientLevels { .. } => "insufficient_levels",
                Error::NotReproducible(_) => "not_reproducible",
                Error::NotConvergent(_) => "not_convergent",
                Error::UnboundedFunction(_) => "unbounded_function",
            },
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
            Self::SuiteFailed { .. } => "suite_failed",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
    }
}
