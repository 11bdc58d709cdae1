//! Symbolic machinery for constant-coefficient PDEs in one unknown `u`.
//!
//! Equations are differential polynomials over the field `Q(params)` of
//! rational functions in the declared parameters. The crate provides exact
//! affine changes of the independent variables (chain-rule pullback),
//! congruence reduction of the second-order principal part, equivalence
//! matching modulo renaming and scalings, and an independent residual oracle
//! built on polynomial test functions.
//!
//! Everything here is pure and allocation-only, so the crate is `no_std`.
//! Parsing, file formats and the command line live in the `pdecanon` crate.

#![no_std]

extern crate alloc;

pub mod canon;
pub mod chainrule;
pub mod coeff;
pub mod diffpoly;
pub mod equiv;
mod error;
pub mod expr;
pub mod linalg;
pub mod oracle;

pub use canon::{derive_reduction, lagrange_diagonalize, principal_matrix, CanonReport, PrincipalMatrix};
pub use chainrule::{compose, invert_transform, pullback, validity_conditions, AffineTransform, DegeneracyReport};
pub use coeff::{ratfun_arith, ratfun_eval, ratfun_sqrt, ArithOp, MPoly, Param, PowerProduct, RatFun, Q};
pub use diffpoly::{normal_form, scale_dependent, subst_params, DerivKey, DiffMonomial, DiffPoly, Notation, VarSet};
pub use equiv::{match_modulo, structural_equal, MatchOutcome, MatchWitness, RefutationCertificate, SeparatingInvariant};
pub use error::{Error, Result};
pub use expr::{expand_total_derivative, Expr};
pub use oracle::{pullback_consistency_check, residual_eval, ConsistencyCheck, OracleWarning, Residual, TestFunction};


