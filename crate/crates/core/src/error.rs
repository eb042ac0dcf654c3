//! Error type shared by every module of the simulator.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("address width must be at least 1, got {0}")]
    InvalidWidth(usize),

    #[error("address {address} out of range for n={n} (valid range 0..{limit})")]
    AddressOutOfRange { address: u64, n: usize, limit: u64 },

    #[error("duplicate address {0} in superposition")]
    DuplicateAddress(u64),

    #[error(
        "state not normalized: sum of squared magnitudes is {norm_sqr}, \
         expected 1 within {tolerance:e}"
    )]
    NotNormalized { norm_sqr: f64, tolerance: f64 },

    #[error("register shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("memory has {actual} cells, expected {expected}")]
    MemorySizeMismatch { expected: usize, actual: usize },

    #[error("cell {address} holds {value}, which does not fit in {d} bit(s)")]
    CellValueTooWide { address: u64, value: u64, d: usize },

    #[error("swap access requires memory cells inside the state (quantum memory mode)")]
    SwapNeedsQuantumMemory,

    #[error("swap access requires the output register to start at 0")]
    SwapNeedsClearOutput,

    #[error("bus precondition violated: {0}")]
    BusState(String),

    #[error("qutrit pattern invalid: {0}")]
    QutritPattern(String),

    #[error("partition must select a nonempty proper subset of registers: {0}")]
    InvalidPartition(String),

    #[error("epsilon must lie in [0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("at least one trial required")]
    NoTrials,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("memory file malformed: {0}")]
    MemoryFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
