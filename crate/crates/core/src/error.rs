use thiserror::Error;

use crate::Point2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message} (expected one of: {})", expected.join(", "))]
    Syntax {
        offset: usize,
        message: String,
        expected: Vec<String>,
    },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{name}` is not available in the {frame} frame")]
    UnboundVariable { name: String, frame: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("function vanishes: |{what}| = {value:e} below threshold {threshold:e} at {at:?}")]
    Vanishing {
        what: String,
        value: f64,
        threshold: f64,
        at: Vec<f64>,
    },

    #[error("singular value while evaluating {what} at ({}, {})", at[0], at[1])]
    Singular { what: String, at: Point2 },

    #[error("degenerate generating pair: {0}")]
    DegeneratePair(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("{what}: residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("path dependence detected: {0}")]
    PathDependent(String),

    #[error("field depends on x3: |d/dx3| = {0:e}")]
    DependsOnX3(f64),

    #[error("input is not a pure vector: scalar part {0:e}")]
    NotPureVector(f64),

    #[error("invalid input: {0}")]
    Invalid(String),
}
