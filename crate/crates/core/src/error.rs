use thiserror::Error;

use crate::complexfield::CPoint;

pub type Result<T, E = EpdError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpdError {
    #[error("kernel singular: evaluation node {lambda} coincides with {which} = {point}")]
    SingularPoint {
        lambda: CPoint,
        point: CPoint,
        which: &'static str,
    },

    #[error("coincident points: z and z-bar coincide at {0}")]
    CoincidentPoints(CPoint),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("quadrature did not converge: last relative change {change:.3e} after {nodes} nodes")]
    QuadratureNonConvergence { change: f64, nodes: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (|residual| = {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate Hessian at beta = {beta} (estimated order {order})")]
    DegenerateHessian { beta: CPoint, order: u32 },

    #[error("critical point collapsed onto the real axis at {0}")]
    CollapseToRealAxis(CPoint),

    #[error("Mobius pole: c z + d vanishes at {0}")]
    MobiusPole(CPoint),

    #[error("transform is not in SL(2,R): ad - bc = {0}")]
    NotUnimodular(f64),

    #[error("zero denominator in velocity ratio")]
    ZeroDenominator,

    #[error("grid too small: need at least {needed} nodes per axis, got {got}")]
    InsufficientGrid { needed: usize, got: usize },

    #[error("history too short: need at least {needed} time levels, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for EpdError {
    fn from(e: std::io::Error) -> Self {
        EpdError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for EpdError {
    fn from(e: serde_json::Error) -> Self {
        EpdError::Parse(e.to_string())
    }
}

impl From<csv::Error> for EpdError {
    fn from(e: csv::Error) -> Self {
        EpdError::Parse(e.to_string())
    }
}
