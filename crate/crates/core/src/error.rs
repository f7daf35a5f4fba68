use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid initial data for species {species} in cell {cell}: {reason}")]
    InputData {
        species: usize,
        cell: usize,
        reason: String,
    },

    #[error("invalid kernel: {0}")]
    Kernel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at step {step} (t = {time}): species {species}, cell {cell}")]
    NonFinite {
        step: usize,
        time: f64,
        species: usize,
        cell: isize,
    },

    #[error("CFL violation at step {step}: lambda * L_F = {value:.6} exceeds {limit:.6}")]
    Cfl { step: usize, value: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves (blow-up, CFL abort),
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::Cfl { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
