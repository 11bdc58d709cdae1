use alloc::string::String;

use crate::coeff::MPoly;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at point: denominator {0} vanishes")]
    PoleAtPoint(String),
    #[error("no value given for parameter `{0}`")]
    MissingParam(String),
    #[error("unsupported expression: {0}")]
    UnsupportedExpression(String),
    #[error("not a differential polynomial: {0}")]
    NonPolynomialInU(String),
    #[error("dependent-variable scale must be nonzero")]
    ZeroScale,
    #[error("singular transform: determinant {det} vanishes")]
    SingularTransform { det: MPoly },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid variable set: {0}")]
    InvalidVarSet(String),
    #[error("invalid elimination target: {0}")]
    InvalidTarget(String),
    #[error("no solution in the unit-triangular family: {0}")]
    NoSolution(String),
    #[error("variable sets differ: {0}")]
    VarSetMismatch(String),
    #[error("permutation search over {0} variables exceeds the budget")]
    SearchBudgetExceeded(usize),
    #[error("inconclusive: {0}")]
    UnresolvedNonlinearSystem(String),
    #[error("witness does not verify: {0}")]
    InvalidWitness(String),
}

pub type Result<T> = core::result::Result<T, Error>;
