use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A Jones matrix annihilated its input; only happens for a non-unitary matrix.
    #[error("Jones matrix produced a zero output vector (norm {norm:e})")]
    ZeroOutput { norm: f64 },

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("QBER is undefined because the overall detection probability is zero")]
    UndefinedQber,

    #[error(
        "invalid bracket [{lo_db}, {hi_db}] dB: rate must be positive at the low end \
         (got {rate_lo:e}) and zero at the high end (got {rate_hi:e})"
    )]
    Bracket {
        lo_db: f64,
        hi_db: f64,
        rate_lo: f64,
        rate_hi: f64,
    },

    #[error("no detections in {sent} trials; empirical QBER is undefined")]
    ZeroDetection { sent: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
