use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PegoError {
    /// A sample evaluated to NaN or infinity.
    #[error("non-finite value {value} at node {index} (t = {t})")]
    NonFinite { index: usize, t: f64, value: String },

    #[error("function rejected as Laplace-Pego of order {order}: {norm} norm diverged numerically")]
    NotPego { order: f64, norm: &'static str },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("scale out of range: {0}")]
    Scale(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invariant violated: {what} (value {value}, bound {bound})")]
    Invariant { what: String, value: f64, bound: f64 },

    #[error("diagnosis refused: {0}")]
    Refused(String),

    #[error("malformed DSL: {0}")]
    Dsl(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, PegoError>;
