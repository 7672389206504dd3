//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A lattice description violated one of its structural constraints
    /// (spacing, parity, dimension, value count).
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    /// Two fields that must live on the same lattice do not.
    #[error("lattice mismatch: {context}")]
    SpecMismatch { context: String },

    /// A numeric argument was outside its admissible range.
    #[error("invalid value for {name}: {message}")]
    InvalidValue { name: &'static str, message: String },

    /// A field contained a non-finite entry.
    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },

    /// Quadrature resolution rejected (too small or not a power of two).
    #[error("quadrature points must be a power of two >= 64, got {got}")]
    QuadPoints { got: usize },

    /// Stencil radius does not fit into the periodic box.
    #[error("stencil radius {radius} must satisfy 1 <= radius < N/2 = {half_n}")]
    RadiusOutOfRange { radius: usize, half_n: usize },

    /// Spectral cutoff exceeds what the lattice can represent.
    #[error(
        "cutoff {cutoff} exceeds the Nyquist frequency 1/(2*hbar) = {nyquist}; \
         requires hbar <= {max_hbar}"
    )]
    NyquistViolation {
        cutoff: f64,
        nyquist: f64,
        max_hbar: f64,
    },

    /// Time-stepping setup rejected.
    #[error("invalid time stepping: {0}")]
    TimeStep(String),

    /// Propagator path asked to handle a configuration it does not support.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A sweep plan violated one of its constraints.
    #[error("invalid sweep plan: {0}")]
    SweepPlan(String),

    /// Rate fitting needs more usable rows.
    #[error("rate fit needs at least 3 rows with positive discrepancy, got {got}")]
    NotEnoughRows { got: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed CSV while reading a field.
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
