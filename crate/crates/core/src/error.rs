use thiserror::Error;

/// Errors raised by the classification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite observation at index {0}")]
    NonFinite(usize),
    #[error("invalid hyperparameter {name}: {value} (must be finite and > 0)")]
    InvalidHyperparam { name: &'static str, value: f64 },
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("invalid group bounds: start {start}, len {len}, n {n}")]
    InvalidGroupBounds { start: usize, len: usize, n: usize },
    #[error("composition/dataset length mismatch: composition sums to {composition}, dataset has {dataset}")]
    LengthMismatch { composition: usize, dataset: usize },
    #[error("exact enumeration infeasible for n = {n} (cap {cap}); use MCMC")]
    EnumerationInfeasible { n: usize, cap: usize },
    #[error("MDP exact enumeration infeasible for n = {n} (cap {cap})")]
    MdpInfeasible { n: usize, cap: usize },
    #[error("no splittable group")]
    NoSplittableGroup,
    #[error("nothing to merge")]
    NothingToMerge,
    #[error("not a one-step split: from has {from} parts, to has {to}")]
    NotOneStepSplit { from: usize, to: usize },
    #[error("no samples collected")]
    NoSamples,
    #[error("invalid MCMC configuration: {0}")]
    InvalidConfig(String),
    #[error("k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("internal invariant violation: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;
