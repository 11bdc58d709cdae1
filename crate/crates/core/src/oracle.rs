//! Exact residuals on polynomial test functions.
//!
//! Substituting a concrete polynomial for `u` turns a differential polynomial
//! into a number at each point. Because derivatives of polynomials are taken
//! directly, this is independent of the chain-rule code and serves as its
//! oracle: a pullback is correct exactly when it gives the same residual as
//! the original equation on the transported test function.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::chainrule::{pullback, AffineTransform};
use crate::coeff::{MPoly, Param, Q};
use crate::diffpoly::{write_key, DerivKey, DiffPoly, Notation, VarSet};
use crate::error::{Error, Result};
use crate::linalg;

/// A polynomial in the independent variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFunction {
    vars: VarSet,
    poly: MPoly,
}

impl TestFunction {
    /// `poly` is written with one [`Param`] per variable name.
    pub fn new(vars: VarSet, poly: MPoly) -> Result<Self> {
        if let Some(bad) = poly.params().into_iter().find(|p| vars.index_of(p.name()).is_none()) {
            return Err(Error::DimensionMismatch(format!("`{bad}` is not one of the variables ({vars})")));
        }
        Ok(TestFunction { vars, poly })
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn poly(&self) -> &MPoly {
        &self.poly
    }

    pub fn derivative(&self, key: &DerivKey) -> MPoly {
        let mut d = self.poly.clone();
        for (i, &o) in key.orders().iter().enumerate() {
            let v = Param::new(self.vars.name(i));
            for _ in 0..o {
                d = d.derivative(&v);
            }
        }
        d
    }

    fn point_assignment(&self, point: &[Q]) -> BTreeMap<Param, Q> {
        self.vars
            .names()
            .iter()
            .zip(point)
            .map(|(n, q)| (Param::new(n.as_str()), q.clone()))
            .collect()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleWarning {
    /// The test function's derivative for this key vanishes identically, so
    /// the residual does not exercise the corresponding terms.
    DegenerateTestFunction { key: String },
}

impl fmt::Display for OracleWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleWarning::DegenerateTestFunction { key } => {
                write!(f, "test function is annihilated by {key}; raise its degree")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub value: Q,
    pub warnings: Vec<OracleWarning>,
}

/// Value of `p[u := f]` at `point`, with parameters fixed to `params`.
pub fn residual_eval(p: &DiffPoly, f: &TestFunction, point: &[Q], params: &BTreeMap<Param, Q>) -> Result<Residual> {
    if p.vars() != f.vars() || point.len() != p.vars().len() {
        return Err(Error::DimensionMismatch(format!(
            "equation over ({}), test function over ({}), point of length {}",
            p.vars(),
            f.vars(),
            point.len()
        )));
    }
    let at = f.point_assignment(point);
    let mut values: BTreeMap<DerivKey, Q> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut total = Q::zero();
    for (m, c) in p.terms() {
        let coef = c.eval(params)?;
        let mut term = coef;
        for (key, e) in m.factors() {
            if !values.contains_key(key) {
                let d = f.derivative(key);
                if d.is_zero() && !f.poly.is_zero() {
                    let mut name = String::new();
                    write_key(&mut name, key, p.vars(), Notation::Subscript).expect("writing to a String");
                    warnings.push(OracleWarning::DegenerateTestFunction { key: name });
                }
                values.insert(key.clone(), d.eval(&at)?);
            }
            let v = &values[key];
            for _ in 0..*e {
                term *= v;
            }
        }
        total += term;
    }
    Ok(Residual { value: total, warnings })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyCheck {
    pub holds: bool,
    pub source_value: Q,
    pub target_value: Q,
}

/// Compares the residual of `p` on `f` at `point` with the residual of the
/// pulled-back equation on `f` transported by the transform.
pub fn pullback_consistency_check(
    p: &DiffPoly,
    t: &AffineTransform,
    f: &TestFunction,
    point: &[Q],
    params: &BTreeMap<Param, Q>,
) -> Result<ConsistencyCheck> {
    let m = t.numeric_matrix(params)?;
    let inv = linalg::inverse(&m).ok_or_else(|| Error::SingularTransform {
        det: t.determinant().num().clone(),
    })?;
    let offset: Vec<Q> = t.offset().iter().map(|c| c.eval(params)).collect::<Result<_>>()?;

    // old_j = sum_k inv[j][k] * (new_k - offset_k)
    let target = t.target();
    let shifted: Vec<MPoly> = (0..target.len())
        .map(|k| &MPoly::var(Param::new(target.name(k))) - &MPoly::constant(offset[k].clone()))
        .collect();
    let map: BTreeMap<Param, MPoly> = (0..t.source().len())
        .map(|j| {
            let expr = (0..target.len()).fold(MPoly::zero(), |acc, k| &acc + &shifted[k].scale(&inv[j][k]));
            (Param::new(t.source().name(j)), expr)
        })
        .collect();
    let g = TestFunction::new(target.clone(), f.poly.compose(&map))?;

    let new_point = t.apply_point(params, point)?;
    let source_value = residual_eval(p, f, point, params)?.value;
    let target_value = residual_eval(&pullback(p, t)?, &g, &new_point, params)?.value;
    Ok(ConsistencyCheck {
        holds: source_value == target_value,
        source_value,
        target_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{PowerProduct, RatFun};
    use alloc::vec;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn tx() -> VarSet {
        VarSet::new(["t", "x"]).unwrap()
    }

    fn mono(pairs: &[(&str, u32)]) -> MPoly {
        MPoly::term(PowerProduct::from_pairs(pairs.iter().map(|(n, e)| (Param::from(*n), *e))), q(1))
    }

    fn u(o: &[u32]) -> DiffPoly {
        DiffPoly::u(&tx(), DerivKey::from_orders(o.to_vec()))
    }

    /// u_tt + u_xx - beta (u^2)_xx - gamma u_xxxx
    fn eq1() -> DiffPoly {
        let sq = u(&[0, 0]).pow(2).derivative(&DerivKey::from_orders(vec![0, 2]));
        &(&(&u(&[2, 0]) + &u(&[0, 2])) - &sq.scale(&RatFun::param("beta")))
            - &u(&[0, 4]).scale(&RatFun::param("gamma"))
    }

    fn unit_params() -> BTreeMap<Param, Q> {
        [(Param::from("beta"), q(1)), (Param::from("gamma"), q(1))].into_iter().collect()
    }

    #[test]
    fn boussinesq_residual_by_hand() {
        // u_tt = 2, u_xx = 12, (u^2)_xx = 24 + 56 = 80, u_xxxx = 24
        let f = TestFunction::new(tx(), &mono(&[("t", 2)]) + &mono(&[("x", 4)])).unwrap();
        let r = residual_eval(&eq1(), &f, &[q(1), q(1)], &unit_params()).unwrap();
        assert_eq!(r.value, q(-90));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn zero_function_and_low_degree() {
        let zero = TestFunction::new(tx(), MPoly::zero()).unwrap();
        let r = residual_eval(&eq1(), &zero, &[q(3), q(-2)], &unit_params()).unwrap();
        assert_eq!(r.value, q(0));
        let lin = TestFunction::new(tx(), mono(&[("t", 1)])).unwrap();
        let r = residual_eval(&eq1(), &lin, &[q(1), q(1)], &unit_params()).unwrap();
        assert!(r
            .warnings
            .contains(&OracleWarning::DegenerateTestFunction { key: "u_xxxx".into() }));
    }

    #[test]
    fn missing_param_and_dimension() {
        let f = TestFunction::new(tx(), mono(&[("t", 2)])).unwrap();
        assert!(matches!(
            residual_eval(&eq1(), &f, &[q(1), q(1)], &BTreeMap::new()),
            Err(Error::MissingParam(_))
        ));
        assert!(matches!(
            residual_eval(&eq1(), &f, &[q(1)], &unit_params()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(TestFunction::new(tx(), mono(&[("y", 1)])).is_err());
    }

    #[test]
    fn shear_consistency() {
        let a = RatFun::param("alpha");
        let p = &eq1() + &u(&[1, 1]).scale(&a);
        let t = AffineTransform::new(
            tx(),
            VarSet::new(["t'", "x'"]).unwrap(),
            vec![vec![RatFun::one(), RatFun::zero()], vec![-&(&a * &RatFun::ratio(1, 2)), RatFun::one()]],
            vec![RatFun::zero(), RatFun::integer(3)],
        )
        .unwrap();
        let f = TestFunction::new(tx(), &mono(&[("t", 2)]) + &mono(&[("x", 4)])).unwrap();
        let mut params = unit_params();
        params.insert(Param::from("alpha"), q(2));
        let check = pullback_consistency_check(&p, &t, &f, &[q(1), q(1)], &params).unwrap();
        assert!(check.holds, "{check:?}");
    }
}
