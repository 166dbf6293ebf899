use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("measure is not absolutely continuous with respect to the reference: {0}")]
    NotAbsolutelyContinuous(String),
    #[error("invalid power series: {0}")]
    InvalidSeries(String),
    #[error("log-density is not integrable (Szego degenerate)")]
    SzegoDegenerate,
    #[error("metric projection does not exist: {0}")]
    ProjectionDoesNotExist(String),
    #[error("truncated outer function has a root in the unit disc; complex power undefined for p = {0}")]
    Condition518Violated(f64),
    #[error("unsupported exponent p = {0}")]
    UnsupportedExponent(f64),
    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),
    #[error("added character is linearly dependent on the existing span")]
    DependentCharacter,
    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),
    #[error("unknown or malformed family: {0}")]
    InvalidFamily(String),
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SzegoDegenerate
            | Error::ProjectionDoesNotExist(_)
            | Error::Condition518Violated(_)
            | Error::DependentCharacter
            | Error::NumericalDivergence(_) => 3,
            _ => 2,
        }
    }
}
