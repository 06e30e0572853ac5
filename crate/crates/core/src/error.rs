use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by state construction, mode algebra, and measurement ops.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {0} is not registered in the registry in use")]
    UnregisteredMode(String),
    #[error("duplicate mode label {0}")]
    DuplicateMode(String),
    #[error("registry must contain at least one mode")]
    EmptyRegistry,
    #[error("states belong to different mode registries")]
    RegistryMismatch,
    #[error("states carry different particle statistics")]
    StatisticsMismatch,
    #[error("state mixes terms with different total particle numbers")]
    MixedSector,
    #[error("matrix is not unitary (largest deviation from U*U^dag = I is {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix shape does not match the mode lists")]
    BadMatrixShape,
    #[error("mode {0} appears more than once in a unitary's mode list")]
    RepeatedMode(String),
    #[error("a particle occupies output-only mode {0} of the unitary being applied")]
    OccupiedOutput(String),
    #[error("labeled state mixes pre-detector and detector paths")]
    MixedStage,
    #[error("operation requires all terms on pre-detector paths (A, A', B, B')")]
    ExpectedPreDetector,
    #[error("operation requires all terms on detector paths (D1, D2, D1', D2')")]
    ExpectedDetector,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("pattern is not a two-particle detector pattern: {0}")]
    InvalidPattern(String),
    #[error("phase must be finite")]
    NonFinitePhase,
}
