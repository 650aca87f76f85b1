use alloc::string::String;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("jet order {0} outside 0..=3")]
    InvalidOrder(usize),
    #[error("jet orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("unsupported activation `{0}`")]
    UnsupportedActivation(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("tape has no recorded node for the requested output")]
    MissingTape,
    #[error("non-finite gradient (epoch {epoch:?}, parameter {index})")]
    NonFiniteGradient { epoch: Option<usize>, index: usize },
    #[error("non-finite {term} (epoch {epoch:?}, sample {sample:?})")]
    NonFiniteLoss {
        term: &'static str,
        epoch: Option<usize>,
        sample: Option<usize>,
    },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("point too close to the blow-up time (|1-2t^2| = {0:e})")]
    Singularity(f64),
    #[error("point is not on a boundary face")]
    NotOnBoundary,
    #[error("problem has no initial condition")]
    NoInitialCondition,
    #[error("configuration: {0}")]
    Config(String),
    #[error("exact solution vanishes on the whole mesh")]
    UndefinedDenominator,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn contract(msg: &str) -> Error {
    Error::Contract(String::from(msg))
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
