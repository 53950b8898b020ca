use thiserror::Error;

/// Errors raised by the exact-arithmetic core.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("subspace is not invariant: generator {generator} moves vector {vector:?} out of it")]
    NotInvariant { generator: String, vector: Vec<String> },
    #[error("surface relation does not evaluate to the identity")]
    RelationViolated,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invariant-subspace enumeration could not certify completeness: {0}")]
    IncompleteLattice(String),
    #[error("enumeration budget exceeded: needs {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("no conjugator found: {0}")]
    NoConjugator(String),
    #[error("representation is not filtered by the given weights: {0}")]
    NotThetaFiltered(String),
    #[error("limit of the one-parameter subgroup does not exist: {0}")]
    LimitDoesNotExist(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
