use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Physical or numerical parameters outside their admissible range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// An argument (position, time, order, ...) outside the operation's domain.
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("ODE integration failed at t = {last_time}: {reason}")]
    Integration { last_time: f64, reason: String },

    #[error("state left its admissible domain at t = {t}: {reason}")]
    StateDomain { t: f64, reason: String },

    #[error("phase structure not completed before t_end = {t_end}: {reason}")]
    HorizonTooShort { t_end: f64, reason: String },

    #[error("configuration error for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("initial perturbation too large: eta_x = {min_stretch:e} at node {node}")]
    PerturbationTooLarge { node: usize, min_stretch: f64 },

    /// The Lagrangian map lost monotonicity (or finiteness) during time stepping.
    #[error("blow-up at t = {t}, node {node}: {reason}")]
    BlowUp { t: f64, node: usize, reason: String },

    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
