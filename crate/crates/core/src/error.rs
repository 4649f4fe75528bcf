use thiserror::Error;

use crate::lattice::SectorSpec;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("sector ({n_up}, {n_down}) does not fit on {n_sites} sites", n_up = .sector.n_up, n_down = .sector.n_down)]
    SectorOutOfRange { sector: SectorSpec, n_sites: usize },

    #[error("mode count mismatch: operator has {operator} modes, basis has {basis}")]
    ModeMismatch { operator: usize, basis: usize },

    #[error("operator maps sector state {from:#b} to {to:#b}, which is outside the sector")]
    LeavesSector { from: u64, to: u64 },

    #[error("dense realization needs {requested} qubits, budget is {budget}")]
    QubitBudget { requested: usize, budget: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("basis mismatch between states: {0}")]
    BasisMismatch(String),

    #[error("state has no fridge factor")]
    NoFridgeFactor,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not quadratic and number conserving: {0}")]
    NotQuadratic(String),

    #[error("invalid occupation: {0}")]
    InvalidOccupation(String),

    #[error("invalid coupler index: {0}")]
    InvalidIndex(String),

    #[error("zero operator cannot be normalized")]
    ZeroOperator,

    #[error("resonance collision: fridge gap {omega} coincides with an off-resonant transition")]
    ResonanceCollision { omega: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scan aborted: {0}")]
    ScanAborted(String),

    #[error(
        "slow sweep did not converge after {doublings} doublings (last change {last_change:.3e})"
    )]
    SweepNotConverged { doublings: usize, last_change: f64 },

    #[error("dimension budget exceeded: {dim} > {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown figure id: {0}")]
    UnknownFigure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Json(_)
                | Error::UnknownFigure(_)
                | Error::InvalidLattice(_)
                | Error::SectorOutOfRange { .. }
                | Error::InvalidParameter(_)
                | Error::DimensionBudget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
