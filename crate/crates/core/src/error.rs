use thiserror::Error;

/// Errors raised by configuration, initialization and the subproblem solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: String, reason: String },

    #[error("invalid discretization: need at least 2 grid points, got {0}")]
    Discretization(usize),

    #[error("infeasible layout: {0}")]
    Infeasible(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("waveguide response is not lossless (column {column} has squared norm {norm_sq})")]
    NotLossless { column: usize, norm_sq: f64 },

    #[error("nonoutage probability {0} admits no finite error bound")]
    UnboundedErrorBound(f64),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverNonConvergence { iterations: usize, residual: f64 },

    #[error("alternating optimization failed at iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("failed to parse configuration: {0}")]
    Parse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
