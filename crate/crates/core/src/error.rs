//! Error types shared by every module of the crate.

use thiserror::Error;

/// Reasons a set of SO(2) labels fails to describe an admissible representation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepresentationError {
    #[error("representation has no levels")]
    Empty,
    #[error("label {label} appears more than once")]
    DuplicateLabel { label: f64 },
    #[error("label {label} has zero multiplicity")]
    ZeroMultiplicity { label: f64 },
    #[error("labels {a} and {b} do not differ by an integer (mixed integer/half-integer parity)")]
    MixedParity { a: f64, b: f64 },
    #[error(
        "labels {labels:?} exceed the bound {bound}; shifting every label by {shift} \
         gives {shifted:?} with J = {shifted_j}, which has the same observable physics"
    )]
    Shiftable { labels: Vec<f64>, bound: f64, shift: f64, shifted: Vec<f64>, shifted_j: f64 },
    #[error("labels {labels:?} need spin at least {required} but the bound is {bound}")]
    BoundViolation { labels: Vec<f64>, bound: f64, required: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    Domain { what: &'static str, value: f64, range: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error("invalid POVM effect: {0}")]
    InvalidEffect(String),
    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("mixture weights are invalid: {0}")]
    BadWeights(String),
    #[error("rotation box leaves [0, 1]: range [{min}, {max}]")]
    InvalidBox { min: f64, max: f64 },
    #[error("Fourier coefficient a_{l} is not the conjugate of a_-{l} (deviation {deviation:e})")]
    ConjugateSymmetry { l: usize, deviation: f64 },
    #[error("malformed coefficients: {0}")]
    MalformedCoefficients(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, range: &'static str) -> Error {
    Error::Domain { what, value, range }
}
