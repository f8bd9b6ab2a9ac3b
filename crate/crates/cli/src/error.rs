use std::process::ExitCode;

/// Failure category, mapped to the process exit code: validation problems
/// exit with 2, solver failures with 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Solver,
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Solver,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self.kind {
            ErrorKind::Validation => ExitCode::from(2),
            ErrorKind::Solver => ExitCode::from(3),
        }
    }
}

impl From<nemcast_core::Error> for CliError {
    fn from(e: nemcast_core::Error) -> Self {
        use nemcast_core::Error as E;
        // Unwrap stage wrappers to classify the root cause.
        let root = {
            let mut cur = &e;
            while let E::Stage { source, .. } = cur {
                cur = source;
            }
            cur.clone()
        };
        let kind = match root {
            E::Solver(_) | E::NonConvergence(_) | E::Singular(_) | E::Infeasible(_) => {
                ErrorKind::Solver
            }
            _ => ErrorKind::Validation,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(format!("io error: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
