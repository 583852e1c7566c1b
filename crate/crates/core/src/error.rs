use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state vector has zero norm")]
    ZeroNorm,

    #[error("state vector is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("measurement direction is not a unit vector (norm = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// An expectation that must be real came out with a sizable imaginary
    /// part. Only reachable through a non-Hermitian construction bug.
    #[error("internal consistency: imaginary residue {residue:e} in a real expectation")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program did not converge within {iterations} pivots")]
    SolverIterationCap { iterations: usize },

    #[error("linear program is numerically singular: {0}")]
    SolverNumerical(String),

    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
