use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("phase is undefined at the origin")]
    PhaseUndefined,

    #[error("no resonance between drive frequency {s0} and base frequency {omega}")]
    NoResonance { s0: f64, omega: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("non-finite integrand at (r = {r}, psi = {psi}, S = {s})")]
    NonFiniteIntegrand { r: f64, psi: f64, s: f64 },

    #[error("right-hand side of the homological equation has mean {mean:e} at (r = {r}, psi = {psi})")]
    InconsistentAveraging { r: f64, psi: f64, mean: f64 },

    #[error("averaged field vanishes identically up to order {0}")]
    IndeterminateOrder(u32),

    #[error("averaged field has no entry for order {0}")]
    MissingOrder(u32),

    #[error("degenerate linearization (det = {0:e})")]
    Degenerate(f64),

    #[error("unsupported asymptotic branch: {0}")]
    UnsupportedBranch(String),

    #[error("Lyapunov form construction failed: {0}")]
    LyapunovConstruction(String),

    #[error("unknown benchmark family `{0}`")]
    UnknownFamily(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("record too short: {0}")]
    RecordTooShort(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Config and usage problems map to exit code 1, numerical failures to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::UnknownFamily(_)
            | Error::RegimeMismatch(_)
            | Error::Json(_)
            | Error::Io { .. }
            | Error::Csv { .. } => 1,
            _ => 2,
        }
    }
}
