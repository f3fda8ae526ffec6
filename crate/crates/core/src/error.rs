//! Error type shared by every module in the crate.

use thiserror::Error;

/// Anything that can go wrong while building geometries, families, witnesses,
/// or while reading and writing mask files.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("signal must have at least one entry")]
    EmptySignal,

    #[error("signal entry {position} is not finite")]
    NonFiniteEntry { position: usize },

    #[error("signal lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("modulation frequency {omega} outside 1..={d}")]
    FrequencyOutOfRange { omega: usize, d: usize },

    #[error("geometry parameters must be positive")]
    NonPositiveGeometry,

    #[error("shift count {shift_count} does not divide signal length {d}")]
    ShiftCountDoesNotDivide { shift_count: usize, d: usize },

    #[error("shift stride {stride} must be smaller than mask support {delta}")]
    StrideNotBelowSupport { stride: usize, delta: usize },

    #[error("mask support {delta} exceeds d/4 = {max} for signal length {d}")]
    SupportTooLarge { delta: usize, d: usize, max: usize },

    #[error("mask support {delta} outside 1..={d} for signal length {d}")]
    SupportOutOfRange { delta: usize, d: usize },

    #[error("mask support must be at least 2, got {delta}")]
    SupportTooSmall { delta: usize },

    #[error("signal length {d} must be even")]
    OddLength { d: usize },

    #[error("mask family is empty")]
    EmptyFamily,

    #[error("mask {index} has a nonzero entry at position {position}, outside the support 1..={delta}")]
    SupportViolation {
        index: usize,
        position: usize,
        delta: usize,
    },

    #[error("family tagged {tag} holds {count} masks but requires {expected}")]
    WrongMaskCount {
        tag: String,
        count: usize,
        expected: usize,
    },

    #[error("window decay parameter b must be positive, got {b}")]
    NonPositiveDecay { b: f64 },

    #[error("frequency list is empty")]
    NoFrequencies,

    #[error("duplicate modulation frequency {omega}")]
    DuplicateFrequency { omega: usize },

    #[error(
        "vector {index} has spectral mass {mass:.3e} at forbidden bin {position} \
         (tolerance {tolerance:.3e})"
    )]
    BandlimitViolation {
        index: usize,
        position: usize,
        mass: f64,
        tolerance: f64,
    },

    #[error("block magnitudes must satisfy 0 <= p <= q with q > 0, got p={p}, q={q}")]
    InvalidMagnitudes { p: f64, q: f64 },

    #[error("witness entry {position} has magnitude {magnitude:.6e} outside [p, q] = [{p:.6e}, {q:.6e}]")]
    MagnitudeOutOfBand {
        position: usize,
        magnitude: f64,
        p: f64,
        q: f64,
    },

    #[error("witness signals are phase-equivalent (quotient distance {distance:.3e})")]
    PhaseEquivalentPair { distance: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("bound formula {id} is missing input {input}")]
    MissingBoundInput { id: String, input: String },

    #[error("scaling fit needs at least 3 points, got {count}")]
    TooFewFitPoints { count: usize },

    #[error("scaling fit needs strictly positive coordinates")]
    NonPositiveFitPoint,

    #[error("scaling fit is degenerate: all abscissas coincide")]
    DegenerateFit,

    #[error("mask file: {0}")]
    MaskFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
