use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum PcmError {
    #[error("matrix dimension {n} is below the minimum of {min}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("matrix dimension {n} exceeds the cap of {cap}")]
    DimensionTooLarge { n: usize, cap: usize },
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("entry ({row},{col}) = {value} is not finite")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },
    #[error("not skew-symmetric at ({row},{col}): a_ij + a_ji = {residual:e}")]
    NotSkewSymmetric { row: usize, col: usize, residual: f64 },
    #[error("entry ({row},{col}) = {value} must be positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("diagonal entry ({index},{index}) = {value}, expected 1")]
    DiagonalNotOne { index: usize, value: f64 },
    #[error("reciprocity violated at ({row},{col}): m_ij * m_ji = {product}")]
    NotReciprocal { row: usize, col: usize, product: f64 },
    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid pair ({i},{j}): need i < j, both within 0..{n}")]
    InvalidPair { i: usize, j: usize, n: usize },
    #[error("invalid permutation: {reason}")]
    InvalidPermutation { reason: String },
    #[error("power iteration did not converge within {max_iterations} iterations")]
    PowerIterationDiverged { max_iterations: usize },
    #[error("basis vector {index} is numerically dependent (squared norm {squared_norm:e})")]
    DependentBasis { index: usize, squared_norm: f64 },
    #[error("entry ({row},{col}) = {value} lies outside the scale bound [-{bound}, {bound}]")]
    EntryOutsideBound {
        row: usize,
        col: usize,
        value: f64,
        bound: f64,
    },
    #[error("scale bound must be positive, got {value}")]
    InvalidScaleBound { value: f64 },
    #[error("alternatives {p} and {q} are not tied at the top of the ranking")]
    NotTiedAtTop { p: usize, q: usize },
    #[error("nudge delta must be non-negative, got {delta}")]
    NegativeDelta { delta: f64 },
    #[error("promotion of alternative {target} stalled after {steps} equalizations")]
    PromotionStalled { target: usize, steps: usize },
    #[error("invalid experiment config: {reason}")]
    InvalidConfig { reason: String },
    #[error("failed to parse {what}: {detail}")]
    Parse { what: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PcmError>;
