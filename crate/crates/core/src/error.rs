use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Input lies outside the envelope a reference path is trusted for.
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("table of {requested} entries exceeds the allocation cap of {cap}")]
    AllocationBound { requested: u64, cap: u64 },

    #[error("index {index} out of range (table holds 0..={n_max})")]
    OutOfRange { index: u64, n_max: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change found after {expansions} bracket expansions (last bracket [{lo}, {hi}])")]
    BracketFailure { expansions: u32, lo: f64, hi: f64 },

    #[error("least-squares system is rank deficient: {0}")]
    SingularSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
