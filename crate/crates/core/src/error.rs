use thiserror::Error;

/// Errors raised by the evaluation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Im(tau) = {im} is below the evaluation floor {floor}")]
    ImTooSmall { im: f64, floor: f64 },

    #[error("point outside the annulus |q| < |q_z| < 1/|q| (|q_z| = {qz_abs}, |q| = {q_abs})")]
    OutOfAnnulus { qz_abs: f64, q_abs: f64 },

    #[error("z lies within {distance:e} of a lattice point")]
    PoleAtLatticePoint { distance: f64 },

    #[error("gram matrix is not square")]
    NotSquare,

    #[error("gram matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("gram matrix is not positive definite (leading minor {index} = {minor})")]
    NotPositiveDefinite { index: usize, minor: i128 },

    #[error("lattice is not even: diagonal entry {index} = {value}")]
    NotEven { index: usize, value: i64 },

    #[error("coset representative has wrong dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not in the dual lattice (gram * beta not integral)")]
    NotInDual,

    #[error("enumeration would visit {visits} candidates, above the cap {cap}")]
    BoundTooLarge { visits: u128, cap: u128 },

    #[error("Gaussian tail bound violated: {0}")]
    TailBoundViolated(String),

    #[error("predicted phase disagrees with direct evaluation by {error:e}")]
    PredictionMismatch { error: f64 },

    #[error("grade cutoff too large: {states} states exceed the cap {cap}")]
    CutoffTooLarge { states: usize, cap: usize },

    #[error("n = {n} exceeds the enumeration limit {max}")]
    NTooLarge { n: usize, max: usize },

    #[error("n - r = {diff} is not a non-negative even number")]
    ParityMismatch { diff: i64 },

    #[error("matrix has determinant {det}, expected 1")]
    NotUnimodular { det: i64 },

    #[error("least-squares system is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
