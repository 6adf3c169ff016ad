use thiserror::Error;

use crate::boundary::Side;

/// Errors raised by grid construction, operators, boundary reconstruction and the solver drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HjError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("order k = {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedOrder(usize),

    #[error("missing boundary derivatives on the {0:?} side")]
    MissingBoundaryDerivatives(Side),

    #[error("not enough nodes for extrapolation: need {needed}, have {have}")]
    InsufficientNodes { needed: usize, have: usize },

    #[error("no inflow root on the {side:?} boundary at t = {t} (node {node:?})")]
    NoInflowRoot {
        side: Side,
        t: f64,
        node: Option<usize>,
    },

    #[error("degenerate characteristic on the {side:?} boundary at t = {t}: |H'| = {slope:e} (node {node:?})")]
    DegenerateCharacteristic {
        side: Side,
        t: f64,
        slope: f64,
        node: Option<usize>,
    },

    #[error("singular local quadrature system in cell {0}")]
    SingularQuadrature(usize),

    #[error("solver produced non-finite values at step {step} (t = {t})")]
    SolverAbort { step: usize, t: f64 },

    #[error("problem `{0}` has no exact solution")]
    MissingExactSolution(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("config error on line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("N = {n}: {source}")]
    AtMesh { n: usize, source: Box<HjError> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for HjError {
    fn from(e: std::io::Error) -> Self {
        HjError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HjError>;
