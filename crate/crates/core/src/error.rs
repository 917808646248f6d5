use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("node ({0}, {1}) is not on the boundary")]
    NotOnBoundary(usize, usize),
    #[error("SOR did not converge in {iterations} sweeps (relative residual {residual:e})")]
    SorDiverged { iterations: usize, residual: f64 },
    #[error("Picard iteration did not converge in {iterations} steps (last change {change:e})")]
    PicardDiverged { iterations: usize, change: f64 },
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("grids are not nested: fine n = {fine}, coarse n = {coarse}")]
    NonNested { fine: usize, coarse: usize },
    #[error("unknown nonlinearity `{0}`")]
    UnknownNonlinearity(String),
    #[error("every reconstruction sample is missing")]
    AllSamplesMissing,
    #[error("every level inversion failed; first failure: {0}")]
    LevelsFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    /// Failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SorDiverged { .. }
                | Error::PicardDiverged { .. }
                | Error::NonFinite(_)
                | Error::AllSamplesMissing
                | Error::LevelsFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
