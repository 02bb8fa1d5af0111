use thiserror::Error;

use crate::field::{FieldError, ParseError};
use crate::jet::{JetError, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Point },
    #[error("field `{0}` depends on t but must be basic")]
    NotBasic(String),
    #[error("model `{0}` needs an explicit connection form (no potential solver)")]
    NotIntegrated(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("function is not positive: {value} at {point:?}")]
    NonPositive { point: Point, value: f64 },
    #[error("deformed form is not contact: eta'^deta' coefficient {value} at {point:?}")]
    ContactDegenerate { point: Point, value: f64 },
    #[error("CR-Reeb reduction invalid: tau-tilde defect {defect:e} at {point:?}")]
    ReductionInvalid { point: Point, defect: f64 },
    #[error("global integrals need a compact cell; model `{0}` has none")]
    NonCompactCell(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl From<JetError> for Error {
    fn from(e: JetError) -> Self {
        Error::Field(FieldError::Jet(e))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
