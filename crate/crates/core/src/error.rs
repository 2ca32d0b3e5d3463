use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the range an operation is defined on.
    #[error("{name} = {value} is outside the supported range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0}")]
    Numerical(String),

    #[error(
        "fixed-point iteration did not converge at step {step} after {iterations} iterations \
         (residual {residual:e} > tolerance {tolerance:e})"
    )]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("non-finite state produced at step {step}")]
    NonFinite { step: usize },

    #[error("meshes are not nested: {0}")]
    Nesting(String),

    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error("unknown problem `{name}`; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by bad arguments or configuration rather than
    /// by a numerical failure during a run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Validation(_)
                | Error::Shape(_)
                | Error::Nesting(_)
                | Error::UnknownProblem { .. }
                | Error::Config(_)
        )
    }
}
