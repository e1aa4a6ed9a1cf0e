use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("interval outside [0,1): {0}")]
    OutOfUnitInterval(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("base set has measure zero")]
    ZeroMeasureBase,
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("map is not invertible")]
    NotInvertible,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("requested {requested} members but the family horizon is {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },
    #[error("tower height {height} exceeds 2^{resolution}")]
    ResolutionTooCoarse { height: usize, resolution: u32 },
    #[error("tower construction failed: {0}")]
    Tower(String),
    #[error("family admits a zero-entropy certificate on its horizon: {0}")]
    ZeroEntropyFamily(String),
    #[error("no family member qualifies as a bad set: {0}")]
    NoBadSet(String),
    #[error("no integer r with {lower} < r < {upper}; regenerate the plan with larger n")]
    EmptyRWindow { lower: Box<Rational>, upper: Box<Rational> },
    #[error("exact join needs {cells} cells, budget is {budget}")]
    BudgetExceeded { cells: usize, budget: usize },
    #[error("audit failed: {0}")]
    Audit(String),
    #[error("set has a non-dyadic endpoint: {0}")]
    NonDyadic(String),
    #[error("deviation {deviation} does not exceed {delta}")]
    NoMargin { deviation: Box<Rational>, delta: Box<Rational> },
}
