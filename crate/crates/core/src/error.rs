use std::path::PathBuf;

use thiserror::Error;

use crate::sdp::FilterDesign;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {band}: {detail}")]
    Dimension { band: String, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix P is singular to working precision")]
    SingularP,

    #[error("Jacobi eigenvalue iteration did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("no strictly feasible point (phase-1 bound {lower_bound:.3e} > 0)")]
    Infeasible { lower_bound: f64 },

    #[error("barrier method did not converge: {reason}")]
    NonConvergence {
        reason: String,
        best: Option<Box<FilterDesign>>,
    },

    #[error("post-solve certification failed: {0}")]
    Certification(String),

    #[error("demand profile is empty")]
    EmptyProfile,

    #[error("operation requires synthetic-theta penetration mode")]
    Mode,

    #[error("truth trajectory is identically zero; relative error undefined")]
    DegenerateTruth,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid value for `{field}`: {msg}")]
    Validation { field: String, msg: String },

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
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
