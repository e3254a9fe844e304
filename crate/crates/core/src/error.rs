use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("amplitude vector length {0} is not a power of two >= 4")]
    BadLength(usize),
    #[error("grid index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("kinetic expansion order {0} is not supported here")]
    UnsupportedOrder(usize),
    #[error("complex amplitudes rejected by the real-amplitude measurement protocol")]
    ComplexAmplitudesRejected,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{qubits} qubits exceeds the dense-matrix limit of {max}")]
    TooLarge { qubits: u32, max: u32 },
    #[error("expected {expected} ansatz parameters, found {found}")]
    ParamLengthMismatch { expected: usize, found: usize },
    #[error("gaussian width must be positive, got {0}")]
    NonpositiveWidth(f64),
    #[error("invalid physics configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid shot plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
