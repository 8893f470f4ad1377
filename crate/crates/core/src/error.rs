use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure in {stage}{} at iteration {iteration}: {reason}", angle_suffix(.angle))]
    Solver {
        stage: &'static str,
        angle: Option<usize>,
        iteration: usize,
        reason: String,
    },

    #[error("bad magic in {path}: expected {expected:?}")]
    BadMagic { path: String, expected: String },

    #[error("malformed header in {path}: {reason}")]
    Header { path: String, reason: String },

    #[error("truncated payload in {path}: expected {expected} bytes, found {actual}")]
    Truncated {
        path: String,
        expected: usize,
        actual: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn angle_suffix(angle: &Option<usize>) -> String {
    angle.map(|a| format!(" at angle {a}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// Attach an angle index: solver failures record it, input errors prefix it.
    pub fn with_angle(self, index: usize) -> Self {
        match self {
            Error::Solver {
                stage,
                angle: None,
                iteration,
                reason,
            } => Error::Solver {
                stage,
                angle: Some(index),
                iteration,
                reason,
            },
            Error::Validation(m) => Error::Validation(format!("angle {index}: {m}")),
            Error::Dimension(m) => Error::Dimension(format!("angle {index}: {m}")),
            other => other,
        }
    }

    /// Rename the stage of a solver failure.
    pub fn in_stage(self, name: &'static str) -> Self {
        match self {
            Error::Solver {
                angle,
                iteration,
                reason,
                ..
            } => Error::Solver {
                stage: name,
                angle,
                iteration,
                reason,
            },
            other => other,
        }
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Solver { .. })
    }
}
