use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{modes} modes exceed the cap of {cap} (Fock dimension 2^{modes} = {dim})")]
    Resource { modes: usize, cap: usize, dim: u128 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("relative entropy is +inf: {0}")]
    InfiniteRelativeEntropy(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn resource(modes: usize, cap: usize) -> Self {
        Error::Resource {
            modes,
            cap,
            dim: 1u128 << modes.min(127),
        }
    }
}
