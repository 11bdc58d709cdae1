//! Unexpanded expression trees and their expansion into differential polynomials.

use alloc::boxed::Box;
use alloc::format;

use crate::coeff::{Param, RatFun, Q};
use crate::diffpoly::{DerivKey, DiffMonomial, DiffPoly, VarSet};
use crate::error::{Error, Result};

/// An expression over `u`, its derivatives, parameters and rationals.
/// `Deriv` applies a total derivative to an arbitrary subexpression, as in `(u^2)_xx`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Q),
    Param(Param),
    U(DerivKey),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Deriv(Box<Expr>, DerivKey),
}

impl Expr {
    /// Expands into normal form, pushing every derivative onto `u` by
    /// linearity and the product rule.
    pub fn to_diffpoly(&self, vars: &VarSet) -> Result<DiffPoly> {
        Ok(match self {
            Expr::Num(q) => DiffPoly::constant(vars, RatFun::constant(q.clone())),
            Expr::Param(p) => DiffPoly::constant(vars, RatFun::param(p.clone())),
            Expr::U(k) => {
                check_key(k, vars)?;
                DiffPoly::from_terms(vars, [(DiffMonomial::factor(k.clone()), RatFun::one())])
            }
            Expr::Neg(a) => -&a.to_diffpoly(vars)?,
            Expr::Add(a, b) => &a.to_diffpoly(vars)? + &b.to_diffpoly(vars)?,
            Expr::Sub(a, b) => &a.to_diffpoly(vars)? - &b.to_diffpoly(vars)?,
            Expr::Mul(a, b) => &a.to_diffpoly(vars)? * &b.to_diffpoly(vars)?,
            Expr::Div(a, b) => {
                let num = a.to_diffpoly(vars)?;
                let den = b.to_diffpoly(vars)?;
                let c = den.as_constant().ok_or_else(|| {
                    Error::NonPolynomialInU(format!("division by `{den}`, which depends on u"))
                })?;
                num.scale(&c.inv()?)
            }
            Expr::Pow(a, k) => {
                let base = a.to_diffpoly(vars)?;
                if *k >= 0 {
                    let k = u32::try_from(*k)
                        .map_err(|_| Error::UnsupportedExpression(format!("exponent {k} too large")))?;
                    base.pow(k)
                } else {
                    let c = base.as_constant().ok_or_else(|| {
                        Error::NonPolynomialInU(format!("negative power of `{base}`, which depends on u"))
                    })?;
                    let k = i32::try_from(*k)
                        .map_err(|_| Error::UnsupportedExpression(format!("exponent {k} too large")))?;
                    DiffPoly::constant(vars, c.pow(k)?)
                }
            }
            Expr::Deriv(a, k) => expand_total_derivative(a, k, vars)?,
        })
    }
}

fn check_key(k: &DerivKey, vars: &VarSet) -> Result<()> {
    if k.len() != vars.len() {
        return Err(Error::DimensionMismatch(format!(
            "derivative key over {} variables used with {} variables",
            k.len(),
            vars.len()
        )));
    }
    Ok(())
}

/// `D_key(e)` expanded into a normalized differential polynomial.
pub fn expand_total_derivative(e: &Expr, key: &DerivKey, vars: &VarSet) -> Result<DiffPoly> {
    check_key(key, vars)?;
    Ok(e.to_diffpoly(vars)?.derivative(key))
}
