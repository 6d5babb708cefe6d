use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid network configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("expansion needs {count} terms, above the cap of {cap}")]
    TermCap { count: usize, cap: usize },

    #[error("{count} candidate paths exceed the enumeration limit of {limit}")]
    SearchSpace { count: u128, limit: u128 },

    #[error("coefficient expansion overflowed: {0}")]
    Overflow(String),

    #[error("divergent rate integral: zero-decay survival term with coefficient {0}")]
    Divergent(f64),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// Errors caused by a size or resource limit rather than a bad argument.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::TermCap { .. } | Error::SearchSpace { .. } | Error::Overflow(_)
        )
    }
}
