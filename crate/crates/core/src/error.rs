use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("unsupported dimension n = {0} (only 1 and 2 are supported)")]
    UnsupportedDimension(usize),
    #[error("point outside the domain: {0}")]
    OutOfDomain(String),
    #[error("cell budget of {max_cells} exceeded (estimate {estimate:e}, error {error:e})")]
    BudgetExceeded {
        max_cells: usize,
        estimate: f64,
        error: f64,
    },
    #[error("need at least {need} reliable ladder levels, have {have}")]
    InsufficientLevels { have: usize, need: usize },
    #[error("reproducing integral not convergent: {0}")]
    NotReproducible(String),
    #[error("level-set functional not convergent: {0}")]
    NotConvergent(String),
    #[error("function is not in the growth space: {0}")]
    UnboundedFunction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
