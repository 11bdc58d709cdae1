use std::fmt;

use pdecanon_core::Error as CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {}, found {found}", .expected.join(" or "))]
    SyntaxError { pos: Pos, expected: Vec<String>, found: String },
    #[error("undeclared identifier `{0}`")]
    UndeclaredIdentifier(String),
    #[error("not polynomial in u: {0}")]
    NonPolynomialInU(String),
    #[error("`{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("right side of `{0}` is not affine in the old variables")]
    NonAffineRightSide(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl ParseError {
    pub fn syntax(pos: Pos, expected: &[&str], found: &str) -> Self {
        ParseError::SyntaxError {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
        }
    }
}
