//! The coefficient field `Q(params)`.
//!
//! Parameters are treated as independent transcendentals, so `1/alpha` is an
//! ordinary field element. Side conditions such as `alpha != 0` are tracked
//! by the callers that introduce them (see [`crate::chainrule::DegeneracyReport`]).

mod mpoly;
mod ratfun;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

pub(crate) use mpoly::gcd;
pub use mpoly::{MPoly, PowerProduct};
pub use ratfun::RatFun;

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Q = num_rational::BigRational;

/// A named symbolic constant of an equation (`alpha`, `beta`, ...).
///
/// Parameters order by name; that order drives the graded-lexicographic
/// term order of [`MPoly`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param(Arc<str>);

impl Param {
    pub fn new(name: impl Into<String>) -> Self {
        Param(Arc::from(name.into()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Param {
    fn from(name: &str) -> Self {
        Param(Arc::from(name))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic; `Div` by the zero function fails.
pub fn ratfun_arith(op: ArithOp, a: &RatFun, b: &RatFun) -> Result<RatFun> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

pub fn ratfun_eval(f: &RatFun, assignment: &BTreeMap<Param, Q>) -> Result<Q> {
    f.eval(assignment)
}

/// Square root inside the field, or `None` when `f` is not a square in `Q(params)`.
pub fn ratfun_sqrt(f: &RatFun) -> Option<RatFun> {
    f.sqrt()
}

/// Integer square root of a nonnegative rational, if it is a perfect square.
pub(crate) fn rational_sqrt(q: &Q) -> Option<Q> {
    use num_traits::Signed;
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

pub(crate) fn missing(p: &Param) -> Error {
    Error::MissingParam(p.name().to_string())
}
