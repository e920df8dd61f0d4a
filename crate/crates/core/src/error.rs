use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: non-finite entries, zero vectors, shape mismatches.
    #[error("invalid input: {0}")]
    Input(String),

    /// A caller-side contract was violated (e.g. `m_i >= n`, a profile outside B°(m)).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A matrix that must have full rank does not, at the working tolerance.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// The point lies (numerically) in the focal locus of a camera, 1-based.
    #[error("point lies in the focal locus of camera {camera}")]
    Indeterminate { camera: usize },

    /// All forms of a linear system vanish at the point.
    #[error("point lies in the base locus of the linear system")]
    BaseLocus,

    /// The homogeneous estimation problem has more than one solution.
    #[error("ambiguous estimate: numerical nullspace has dimension {dim}")]
    Ambiguous { dim: usize },

    #[error("random generation failed after {attempts} attempts")]
    Generation { attempts: usize },

    #[error("no candidate reached the residual threshold (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    /// Process exit code for the command line front end: 2 for validation
    /// failures, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Precondition(_)
            | Error::IndexOutOfRange(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Degenerate(_)
            | Error::Indeterminate { .. }
            | Error::BaseLocus
            | Error::Ambiguous { .. }
            | Error::Generation { .. }
            | Error::NoConvergence { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
