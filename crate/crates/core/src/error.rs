use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps each variant onto a process exit code (see [`Error::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("{what} = {value} lies outside the open interval ({lo}, {hi})")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("rows {first:?} and {second:?} are not mutually absolutely continuous")]
    AbsoluteContinuity { first: String, second: String },

    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("exponent estimation failed: {0}")]
    Estimation(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// 0 success, 2 input/usage, 3 domain/feasibility, 4 numeric non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::AlphabetMismatch(_) | Error::Parse(_) => 2,
            Error::Domain { .. } | Error::AbsoluteContinuity { .. } => 3,
            Error::Bracket { .. } | Error::Estimation(_) | Error::NonConvergence(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
