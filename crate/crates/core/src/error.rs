use std::path::PathBuf;

use thiserror::Error;

use crate::integrator::NewtonReport;

/// Failures surfaced by grid construction, the implicit solver and the experiment runner.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonphysical state: {what}{} at index {index}", column_suffix(.column))]
    NonPhysical {
        what: &'static str,
        column: Option<usize>,
        index: usize,
    },

    #[error("newton iteration did not converge after {} iterations{}", .report.iterations, column_suffix(.column))]
    NonConvergence {
        column: Option<usize>,
        report: Box<NewtonReport>,
    },

    #[error("linear solver breakdown in {stage}{}", column_suffix(.column))]
    SolverBreakdown {
        stage: &'static str,
        column: Option<usize>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    InvalidArgument,
    NonPhysical,
    NonConvergence,
    SolverBreakdown,
    Config,
    Io,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::InvalidArgument => "invalid-argument",
            ErrorCode::NonPhysical => "nonphysical-state",
            ErrorCode::NonConvergence => "non-convergence",
            ErrorCode::SolverBreakdown => "solver-breakdown",
            ErrorCode::Config => "invalid-config",
            ErrorCode::Io => "io",
        }
    }
}

impl SolverError {
    pub fn code(&self) -> ErrorCode {
        match self {
            SolverError::InvalidArgument(_) => ErrorCode::InvalidArgument,
            SolverError::NonPhysical { .. } => ErrorCode::NonPhysical,
            SolverError::NonConvergence { .. } => ErrorCode::NonConvergence,
            SolverError::SolverBreakdown { .. } => ErrorCode::SolverBreakdown,
            SolverError::Config(_) => ErrorCode::Config,
            SolverError::Io { .. } => ErrorCode::Io,
        }
    }

    /// Process exit code used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            ErrorCode::InvalidArgument | ErrorCode::Config => 2,
            ErrorCode::NonConvergence | ErrorCode::SolverBreakdown => 3,
            ErrorCode::NonPhysical => 4,
            ErrorCode::Io => 5,
        }
    }

    /// Tags the error with the horizontal column it came from.
    pub fn in_column(self, col: usize) -> Self {
        match self {
            SolverError::NonPhysical { what, index, .. } => SolverError::NonPhysical {
                what,
                column: Some(col),
                index,
            },
            SolverError::NonConvergence { report, .. } => SolverError::NonConvergence {
                column: Some(col),
                report,
            },
            SolverError::SolverBreakdown { stage, .. } => SolverError::SolverBreakdown {
                stage,
                column: Some(col),
            },
            other => other,
        }
    }

    pub(crate) fn nonphysical(what: &'static str, index: usize) -> Self {
        SolverError::NonPhysical {
            what,
            column: None,
            index,
        }
    }
}

fn column_suffix(column: &Option<usize>) -> String {
    column
        .map(|c| format!(" in column {c}"))
        .unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, SolverError>;
