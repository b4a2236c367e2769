use thiserror::Error;

/// Errors raised by the laboratory. Variants are grouped by how the command
/// line front end maps them to exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("empty function class: {0}")]
    EmptyClass(String),

    #[error("class too large: {count} members exceeds cap {cap}")]
    SizeCap { count: u128, cap: usize },

    #[error("exact search cap exceeded: {size} members > cap {cap}")]
    ExactCap { size: usize, cap: usize },

    #[error("tabulated curve covers only (0, {covered}] but δ = {requested}")]
    Coverage { covered: f64, requested: f64 },

    #[error("bisection bracket not found: {0}")]
    NonBracketing(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 3 for configuration problems, 4 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Range(_)
            | Error::NonBracketing(_)
            | Error::Quadrature(_)
            | Error::Verification(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
