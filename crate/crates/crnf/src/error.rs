use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} outside supported range 2..={max}", max = crate::series::MAX_DIM)]
    BadDimension(usize),
    #[error("truncation degree {0} outside supported range 0..={max}", max = crate::series::MAX_CAP)]
    BadCap(u32),
    #[error("degree {t} out of range for cap {cap}")]
    DegreeOutOfRange { t: u32, cap: u32 },
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("order violation: {0}")]
    Order(String),
    #[error("constant term violation: {0}")]
    ConstantTerm(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("unexpected variable: {0}")]
    UnexpectedVariable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
