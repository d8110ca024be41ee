//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} outside the supported range 1..=4")]
    DimensionOutOfRange(usize),
    #[error("domain sides must be positive")]
    NonPositiveSide,
    #[error("operation requires canonical side lengths (2*pi torus, pi box)")]
    NonCanonicalSides,
    #[error("ball center lies outside the domain")]
    CenterOutsideDomain,
    #[error("ball radius {0} too large for the domain")]
    RadiusTooLarge(f64),
    #[error("ball straddles the Dirichlet boundary")]
    BallOutsideDomain,
    #[error("grid resolution {got} below minimum {min}")]
    ResolutionTooSmall { got: usize, min: usize },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("domain or grid mismatch between inputs")]
    GridMismatch,
    #[error("{0} is not an eigenvalue of this domain")]
    NotAnEigenvalue(u64),
    #[error("cosine factors are not admissible on a Dirichlet box")]
    CosineOnDirichletBox,
    #[error("frequency vector invalid for this domain")]
    InvalidFrequency,
    #[error("point lies outside the domain")]
    PointOutsideDomain,
    #[error("field has a single sign; no nodal set to work with")]
    OneSignedField,
    #[error("ball pack is empty")]
    EmptyBallPack,
    #[error("ball does not satisfy the vanishing condition")]
    NonVanishingBall,
    #[error("field vanishes identically on the half ball")]
    ZeroHalfBall,
    #[error("nodal meshing supports n in {{2,3}}, got {0}")]
    MeshingUnsupported(usize),
    #[error("power-law fit needs at least 3 points")]
    TooFewPoints,
    #[error("power-law fit needs positive values and two distinct abscissae")]
    DegenerateFitData,
    #[error("Lebesgue exponent {0} outside the admissible range")]
    ExponentOutOfRange(String),
    #[error("harmonic sample must be positive at the origin")]
    NonPositiveAtOrigin,
    #[error("invalid harmonic basis index (degree {degree}, index {index})")]
    InvalidBasisIndex { degree: u32, index: i32 },
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
