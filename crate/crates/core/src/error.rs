use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("parameter `{name}` out of range: {detail}")]
    OutOfRange { name: &'static str, detail: String },

    #[error("injected randomness rejected: {0}")]
    InvalidInjection(String),

    #[error("zero variance: {0}")]
    Degenerate(String),

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("malformed edge list at line {line}: {reason}")]
    GraphParse { line: usize, reason: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn range(name: &'static str, detail: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            detail: detail.into(),
        }
    }
}

/// Rejects `p` outside the open unit interval.
pub(crate) fn check_open_unit(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::range(name, format!("{p} is not in (0, 1)")))
    }
}
