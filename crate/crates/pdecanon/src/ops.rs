//! The operations behind the command-line front end, returning structured
//! reports rather than text.

use std::collections::{BTreeMap, BTreeSet};

use pdecanon_core::{
    derive_reduction, lagrange_diagonalize, linalg, match_modulo, principal_matrix, pullback,
    pullback_consistency_check, validity_conditions, AffineTransform, CanonReport, DegeneracyReport, DerivKey,
    DiffMonomial, DiffPoly, Error as CoreError, MatchOutcome, Notation, Param, RatFun, TestFunction, VarSet, Q,
};

use crate::doc::PdeDoc;
use crate::random::Gen;

/// The first monomial, in normal-form order, whose coefficients differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Difference {
    pub monomial: String,
    pub got: RatFun,
    pub expected: RatFun,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// The expected equation rewritten over the pulled-back variables.
    pub expected: PdeDoc,
    /// Set when the expected document was matched to the target variables by position.
    pub positional: bool,
    pub first_difference: Option<Difference>,
}

impl Comparison {
    pub fn equal(&self) -> bool {
        self.first_difference.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub transform: AffineTransform,
    pub pulled: PdeDoc,
    pub conditions: DegeneracyReport,
    /// Target variables the pulled-back equation no longer depends on.
    pub collapsed: Vec<String>,
    pub comparison: Option<Comparison>,
}

/// Target variables that dropped out, reported only when the number of
/// variables the equation depends on went down.
pub fn collapsed_vars(before: &DiffPoly, after: &DiffPoly) -> Vec<String> {
    let active = after.active_vars();
    if active.len() >= before.active_vars().len() {
        return Vec::new();
    }
    (0..after.vars().len())
        .filter(|i| !active.contains(i))
        .map(|i| after.vars().name(i).to_string())
        .collect()
}

/// `expected` rewritten over `target`: by variable name when every name is
/// found, otherwise by position when the counts agree.
pub fn align(expected: &PdeDoc, target: &VarSet) -> Result<(PdeDoc, bool), CoreError> {
    if expected.vars == *target {
        return Ok((expected.clone(), false));
    }
    let by_name: Option<Vec<usize>> = expected.vars.names().iter().map(|n| target.index_of(n)).collect();
    let (lhs, positional) = match by_name {
        Some(idx) => {
            let lhs = expected.lhs.map_keys(target, |k| {
                let mut orders = vec![0; target.len()];
                for (i, &o) in k.orders().iter().enumerate() {
                    orders[idx[i]] = o;
                }
                DerivKey::from_orders(orders)
            });
            (lhs, false)
        }
        None => (expected.lhs.with_vars(target)?, true),
    };
    Ok((
        PdeDoc {
            name: expected.name.clone(),
            vars: target.clone(),
            params: expected.params.clone(),
            lhs,
        },
        positional,
    ))
}

pub fn first_difference(got: &DiffPoly, expected: &DiffPoly) -> Option<Difference> {
    let monomials: BTreeSet<&DiffMonomial> = got.terms().chain(expected.terms()).map(|(m, _)| m).collect();
    monomials.into_iter().find_map(|m| {
        let (a, b) = (got.coefficient(m), expected.coefficient(m));
        (a != b).then(|| Difference {
            monomial: got.monomial_string(m, Notation::Subscript),
            got: a,
            expected: b,
        })
    })
}

pub fn verify(source: &PdeDoc, t: &AffineTransform, expect: Option<&PdeDoc>) -> Result<VerifyReport, CoreError> {
    let lhs = pullback(&source.lhs, t)?;
    let collapsed = collapsed_vars(&source.lhs, &lhs);
    let pulled = PdeDoc {
        name: source.name.clone(),
        vars: t.target().clone(),
        params: source.params.clone(),
        lhs,
    };
    let comparison = match expect {
        Some(e) => {
            let (expected, positional) = align(e, &pulled.vars)?;
            let first_difference = first_difference(&pulled.lhs, &expected.lhs);
            Some(Comparison {
                expected,
                positional,
                first_difference,
            })
        }
        None => None,
    };
    Ok(VerifyReport {
        transform: t.clone(),
        pulled,
        conditions: validity_conditions(t),
        collapsed,
        comparison,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonOutcome {
    pub report: CanonReport,
    pub reduced: PdeDoc,
    pub collapsed: Vec<String>,
    /// `S^T A S` equals the reported principal matrix and its diagonal, exactly.
    pub congruence_verified: bool,
}

/// Full diagonalization when `eliminate` is `None`, otherwise the targeted
/// reduction keeping `frozen` variables fixed.
pub fn canon(
    doc: &PdeDoc,
    eliminate: Option<&BTreeSet<DerivKey>>,
    frozen: &BTreeSet<String>,
) -> Result<CanonOutcome, CoreError> {
    let a = principal_matrix(&doc.lhs);
    let report = match eliminate {
        Some(keys) => derive_reduction(&doc.lhs, keys, frozen)?,
        None => lagrange_diagonalize(&a),
    };
    let s = report.congruence_matrix();
    let sas = linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&s), a.entries()), &s);
    let congruence_verified = &sas == report.principal.entries() && report.principal.diag() == report.diagonal;
    let lhs = pullback(&doc.lhs, &report.transform)?;
    let collapsed = collapsed_vars(&doc.lhs, &lhs);
    Ok(CanonOutcome {
        reduced: PdeDoc {
            name: doc.name.clone(),
            vars: report.transform.target().clone(),
            params: doc.params.clone(),
            lhs,
        },
        report,
        collapsed,
        congruence_verified,
    })
}

pub fn match_docs(p: &PdeDoc, q: &PdeDoc) -> Result<MatchOutcome, CoreError> {
    match_modulo(&p.lhs, &q.lhs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRun {
    pub seed: u64,
    pub params: BTreeMap<Param, Q>,
    pub point: Vec<Q>,
    pub function: TestFunction,
    pub holds: bool,
    pub source_value: Q,
    pub target_value: Q,
}

/// Conditions under which `p` and its pullback by `t` can be evaluated.
pub fn evaluation_conditions(p: &DiffPoly, t: &AffineTransform) -> DegeneracyReport {
    let mut conditions = validity_conditions(t);
    for (_, c) in p.terms() {
        conditions.insert(c.den());
    }
    conditions
}

/// Seeded pullback consistency check: random parameters off the degeneracy
/// loci, a random polynomial test function and a random rational point.
pub fn oracle_check(p: &DiffPoly, t: &AffineTransform, seed: u64) -> Result<OracleRun, CoreError> {
    let mut gen = Gen::new(seed);
    let mut names: BTreeSet<Param> = p.params();
    names.extend(t.params());
    let conditions = evaluation_conditions(p, t);
    let params = gen
        .params_avoiding(&names, &conditions)
        .ok_or_else(|| CoreError::NoSolution("no parameter values avoid the degeneracy conditions".into()))?;
    let function = gen.test_function(p.vars(), p.max_order() + 1);
    let point = gen.point(p.vars().len());
    let check = pullback_consistency_check(p, t, &function, &point, &params)?;
    Ok(OracleRun {
        seed,
        params,
        point,
        function,
        holds: check.holds,
        source_value: check.source_value,
        target_value: check.target_value,
    })
}
