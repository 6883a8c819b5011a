use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix failed the density-matrix checks (Hermiticity, trace, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller misuse: bad labels, out-of-range times, malformed configuration.
    #[error("usage error: {0}")]
    Usage(String),

    /// A computed quantity violated a bound it must satisfy.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Iterative routine failed to converge.
    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Numerical failure at a particular point of a time grid.
    #[error("at nu*t = {nt}: {source}")]
    AtTime {
        nt: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_time(self, nt: f64) -> Self {
        Error::AtTime {
            nt,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input rather than numerics.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Usage(_) => true,
            Error::AtTime { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
