use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate row: {0}")]
    DegenerateRow(String),
    #[error("no alternation observed: {0}")]
    NoAlternation(String),
    #[error("lost root: {0}")]
    LostRoot(String),
    #[error("not in catalog: {0}")]
    NotInCatalog(String),
    #[error("rank deficiency: {0}")]
    RankDeficiency(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
