use std::path::PathBuf;

/// Errors produced by the capacity, receiver and oracle routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The FF-SFG cascade model does not apply at these parameters.
    #[error("cascade model invalid: {0}")]
    Validity(String),

    #[error("inconsistent channel probabilities: {0}")]
    Consistency(String),

    #[error("no convergence after {iterations} iterations (last gap {gap:e})")]
    Convergence { iterations: usize, gap: f64 },

    #[error("photon-count truncation did not resolve: k_max = {k_max}, tail bound = {tail:e}")]
    Resolution { k_max: u64, tail: f64 },

    #[error("invalid sweep grid: {0}")]
    Grid(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
