use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported weight {weight}; supported weights are {supported:?}")]
    UnsupportedWeight { weight: u32, supported: &'static [u32] },

    #[error("argument {0} is within 1e-8 of a pole")]
    NearPole(String),

    #[error("series length {requested} exceeds the configured cap {cap}")]
    MemoryBudget { requested: usize, cap: usize },

    #[error("eigenvalue table too short: need N_max >= {required}, have {available}")]
    TableTooShort { required: usize, available: usize },

    #[error("prime cutoff {cutoff} insufficient: tail bound {tail_bound:e} > {tolerance:e}; try P >= {suggested}")]
    CutoffInsufficient {
        cutoff: u64,
        tail_bound: f64,
        tolerance: f64,
        suggested: u64,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("outside validated region: {0}")]
    OutsideRegion(String),

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("cache I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
