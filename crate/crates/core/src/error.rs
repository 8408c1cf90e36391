use thiserror::Error;

/// Errors raised by the model evaluations and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no root of the side equation in [{lo}, {hi}] (C = {coupling}, rhs = {rhs})")]
    NoRoot {
        lo: f64,
        hi: f64,
        coupling: f64,
        rhs: f64,
    },
    #[error(
        "side equation is not monotone on [{lo}, {hi}] (C = {coupling}); root may not be unique"
    )]
    MultipleRoots { lo: f64, hi: f64, coupling: f64 },
    #[error("singular state: {0}")]
    SingularState(String),
    #[error("divergent value: {0}")]
    DivergentValue(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NoRoot { .. } => "no_root",
            Error::MultipleRoots { .. } => "multiple_roots",
            Error::SingularState(_) => "singular_state",
            Error::DivergentValue(_) => "divergent_value",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
