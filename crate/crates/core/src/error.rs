use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed arguments that do not fit together.
    #[error("usage error: {0}")]
    Usage(String),

    /// A value is outside the domain of the operation (e.g. a zero probability).
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact enumeration would touch more cells than the configured guard.
    #[error("capacity error: {what} needs {required} cells but the enumeration guard is {limit}; {hint}")]
    Capacity {
        what: String,
        required: u128,
        limit: usize,
        hint: String,
    },

    /// Iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:e}){}", vertex_suffix(*.vertex))]
    NonConvergence {
        iterations: usize,
        residual: f64,
        vertex: Option<usize>,
    },

    /// The maximum likelihood estimate does not exist for these data.
    #[error("maximum likelihood estimate does not exist: {reason}{}", vertex_suffix(*.vertex))]
    Nonexistence {
        reason: String,
        vertex: Option<usize>,
    },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("parameter {cell} has no contributing vertex")]
    Coverage { cell: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("every replication at sample size {sample_size} was discarded")]
    DataStarvation { sample_size: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn vertex_suffix(vertex: Option<usize>) -> String {
    vertex.map(|v| format!(" at vertex {v}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn nonexistence(reason: impl Into<String>) -> Self {
        Error::Nonexistence {
            reason: reason.into(),
            vertex: None,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True when the error means the estimate should be flagged as missing
    /// rather than treated as a failure of the program.
    pub fn is_nonexistence(&self) -> bool {
        matches!(self, Error::Nonexistence { .. } | Error::NonConvergence { .. })
    }

    /// Attaches the vertex at which a local computation failed.
    pub fn at_vertex(self, v: usize) -> Self {
        match self {
            Error::NonConvergence {
                iterations,
                residual,
                ..
            } => Error::NonConvergence {
                iterations,
                residual,
                vertex: Some(v),
            },
            Error::Nonexistence { reason, .. } => Error::Nonexistence {
                reason,
                vertex: Some(v),
            },
            other => other,
        }
    }
}
