use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sizing error: {0}")]
    Sizing(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("margin error: need ambient margin >= {needed}, have {have}")]
    Margin { needed: f64, have: f64 },
    #[error("intensity unavailable for model {0}")]
    IntensityUnavailable(String),
    #[error("insufficient conditioning mass: {accepted} of {replicates} replicates accepted")]
    Starvation { accepted: usize, replicates: usize },
    #[error("invalid pattern: {0}")]
    Pattern(String),
    #[error("malformed complex: {0}")]
    Malformed(String),
    #[error("non-monotone filtration: face {face:?} born at {face_birth} before its facet {facet:?} at {facet_birth}")]
    NonMonotone {
        face: Vec<u32>,
        face_birth: f64,
        facet: Vec<u32>,
        facet_birth: f64,
    },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("too many excluded replicates: {excluded} of {total}")]
    Excluded { excluded: usize, total: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
