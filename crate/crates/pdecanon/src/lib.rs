//! Text formats, bundled scenarios and command-line front end for
//! [`pdecanon_core`].

pub mod doc;
pub mod error;
mod lexer;
mod parser;

pub use doc::{
    parse_assignments, parse_keys, parse_pde, parse_point, parse_rational, parse_ratfun, parse_test_function,
    parse_transform, print_canonical, print_document, print_explicit, print_transform, PdeDoc,
};
pub use error::{ParseError, Pos};
pub mod cli;
pub mod json;
pub mod ops;
pub mod random;
pub mod scenario;
