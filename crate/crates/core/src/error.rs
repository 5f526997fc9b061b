use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix of size {len} is not square with a positive dimension")]
    NotSquare { len: usize },

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("non-unitary matrix: max deviation of U^dagger U from I is {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("non-normalized state: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("density matrix is invalid: {reason}")]
    InvalidDensity { reason: String },

    #[error("observable spectrum is not integer-valued (eigenvalue {value})")]
    NonIntegerSpectrum { value: f64 },

    #[error("pointer shift wraps around: level {level} shifted by {shift} leaves [0, {probe_dim})")]
    Wraparound { level: usize, shift: i64, probe_dim: usize },

    #[error("readout {readout} is not an eigenvalue of the meter observable")]
    UnknownReadout { readout: f64 },

    #[error("readout {readout} has probability {probability:e}; conditioning is undefined")]
    ZeroProbability { readout: f64, probability: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("unknown relation id `{0}`")]
    UnknownRelation(String),

    #[error("invalid value map `{0}`")]
    InvalidValueMap(String),

    #[error("witness does not reproduce: stored slack {stored}, recomputed {recomputed}")]
    ReproductionMismatch { stored: f64, recomputed: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
