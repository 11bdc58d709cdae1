//! Canonical forms of the linear second-order part.
//!
//! The principal matrix `A` collects the `u`-linear second-order terms. An
//! affine change `new = M * old` turns it into `M A M^T`, so reducing a PDE to
//! canonical form is congruence diagonalization over `Q(params)`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::chainrule::{pullback, validity_conditions, AffineTransform, DegeneracyReport};
use crate::coeff::RatFun;
use crate::diffpoly::{DerivKey, DiffPoly, VarSet};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Node budget for the reduction search.
const SEARCH_BUDGET: usize = 20_000;

/// Symmetric coefficient matrix of the `u`-linear second-order terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalMatrix {
    vars: VarSet,
    entries: Matrix<RatFun>,
}

impl PrincipalMatrix {
    pub fn new(vars: VarSet, entries: Matrix<RatFun>) -> Result<Self> {
        let n = vars.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("principal matrix must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::DimensionMismatch("principal matrix must be symmetric".into()));
                }
            }
        }
        Ok(PrincipalMatrix { vars, entries })
    }

    pub fn diagonal(vars: VarSet, diag: &[RatFun]) -> Self {
        let mut entries = linalg::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            entries[i][i] = d.clone();
        }
        PrincipalMatrix { vars, entries }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn entries(&self) -> &Matrix<RatFun> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFun {
        &self.entries[i][j]
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.vars.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[i][j].is_zero()))
    }

    pub fn diag(&self) -> Vec<RatFun> {
        (0..self.vars.len()).map(|i| self.entries[i][i].clone()).collect()
    }

    /// `M A M^T`, the matrix after the change of variables `new = M * old`.
    pub fn transformed(&self, m: &[Vec<RatFun>], vars: VarSet) -> PrincipalMatrix {
        let entries = linalg::mat_mul(&linalg::mat_mul(m, &self.entries), &linalg::transpose(m));
        PrincipalMatrix { vars, entries }
    }
}

impl fmt::Display for PrincipalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Result of a canonical-form reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonReport {
    pub transform: AffineTransform,
    /// Diagonal of the principal matrix after the transform.
    pub diagonal: Vec<RatFun>,
    /// Full principal matrix after the transform; diagonal for
    /// [`lagrange_diagonalize`], possibly not for [`derive_reduction`].
    pub principal: PrincipalMatrix,
    pub degeneracy: DegeneracyReport,
    pub normalization_notes: Vec<String>,
}

impl CanonReport {
    /// `S` with `S^T A S = D`; the transpose of the transform matrix.
    pub fn congruence_matrix(&self) -> Matrix<RatFun> {
        linalg::transpose(self.transform.matrix())
    }
}

/// Extracts the `u`-linear, exactly second-order terms.
pub fn principal_matrix(p: &DiffPoly) -> PrincipalMatrix {
    let n = p.vars().len();
    let mut a: Matrix<RatFun> = linalg::zeros(n, n);
    let half = RatFun::ratio(1, 2);
    for (m, c) in p.terms() {
        let [(key, 1)] = m.factors() else { continue };
        if key.order() != 2 {
            continue;
        }
        let idx: Vec<usize> = key.support().collect();
        match idx[..] {
            [i] => a[i][i] = c.clone(),
            [i, j] => {
                let h = c * &half;
                a[i][j] = h.clone();
                a[j][i] = h;
            }
            _ => unreachable!("second-order key has one or two variables"),
        }
    }
    PrincipalMatrix {
        vars: p.vars().clone(),
        entries: a,
    }
}

/// Appends a prime to every variable not marked `keep`, adding more primes on collisions.
fn primed_names(vars: &VarSet, keep: &[bool]) -> VarSet {
    let mut names: Vec<String> = vars.names().to_vec();
    for (i, name) in names.iter_mut().enumerate() {
        if keep[i] {
            continue;
        }
        let mut candidate = format!("{name}'");
        while vars.names().iter().any(|n| *n == candidate) {
            candidate.push('\'');
        }
        *name = candidate;
    }
    VarSet::new(names).expect("primed names stay distinct")
}

fn bilinear(a: &Matrix<RatFun>, x: &[RatFun], y: &[RatFun]) -> RatFun {
    let mut acc = RatFun::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if yj.is_zero() || a[i][j].is_zero() {
                continue;
            }
            acc = &acc + &(&(xi * &a[i][j]) * yj);
        }
    }
    acc
}

fn not_square_note(name: &str, d: &RatFun) -> String {
    format!("{name}: coefficient {d} is not a square in Q(params); scaling it to 1 needs sqrt({d})")
}

fn degeneracy_of(t: &AffineTransform, diag: &[RatFun]) -> DegeneracyReport {
    let mut r = validity_conditions(t);
    for d in diag {
        r.insert_ratfun(d);
    }
    r
}

/// Congruence (Lagrange) diagonalization: `M A M^T = D` with `M` built by
/// row operations, perfect-square pivots scaled to 1.
pub fn lagrange_diagonalize(a: &PrincipalMatrix) -> CanonReport {
    let n = a.vars.len();
    let mut b = a.entries.clone();
    let mut p: Matrix<RatFun> = linalg::identity(n);

    // row r += f * row k, applied as a congruence
    let add_row = |b: &mut Matrix<RatFun>, p: &mut Matrix<RatFun>, r: usize, k: usize, f: &RatFun| {
        for c in 0..n {
            let v = &b[r][c] + &(f * &b[k][c]);
            b[r][c] = v;
        }
        for c in 0..n {
            let v = &b[c][r] + &(f * &b[c][k]);
            b[c][r] = v;
        }
        for c in 0..n {
            let v = &p[r][c] + &(f * &p[k][c]);
            p[r][c] = v;
        }
    };

    for k in 0..n {
        if b[k][k].is_zero() {
            let Some(j) = (k + 1..n).find(|&j| !b[k][j].is_zero()) else {
                continue;
            };
            if let Some(s) = (k + 1..n).find(|&s| !b[s][s].is_zero()) {
                b.swap(k, s);
                for row in b.iter_mut() {
                    row.swap(k, s);
                }
                p.swap(k, s);
            } else {
                add_row(&mut b, &mut p, k, j, &RatFun::one());
            }
        }
        let pivot = b[k][k].clone();
        for r in k + 1..n {
            if b[r][k].is_zero() {
                continue;
            }
            let f = -&b[r][k].checked_div(&pivot).expect("pivot is nonzero");
            add_row(&mut b, &mut p, r, k, &f);
        }
    }

    let mut unnormalized = Vec::new();
    for k in 0..n {
        let d = b[k][k].clone();
        if d.is_zero() || d.is_one() {
            continue;
        }
        match d.sqrt() {
            Some(s) => {
                let inv = s.inv().expect("square root of a nonzero element");
                for c in p[k].iter_mut() {
                    *c = &*c * &inv;
                }
                b[k][k] = RatFun::one();
            }
            None => unnormalized.push(k),
        }
    }
    let target = if p == linalg::identity::<RatFun>(n) {
        a.vars.clone()
    } else {
        primed_names(&a.vars, &vec![false; n])
    };
    let notes = unnormalized
        .into_iter()
        .map(|k| not_square_note(target.name(k), &b[k][k]))
        .collect();

    let diag: Vec<RatFun> = (0..n).map(|i| b[i][i].clone()).collect();
    let transform = AffineTransform::new(a.vars.clone(), target.clone(), p, vec![RatFun::zero(); n])
        .expect("square transform");
    debug_assert!(a.transformed(transform.matrix(), target.clone()).is_diagonal());
    CanonReport {
        degeneracy: degeneracy_of(&transform, &diag),
        principal: PrincipalMatrix::diagonal(target, &diag),
        diagonal: diag,
        transform,
        normalization_notes: notes,
    }
}

/// One condition `(M A M^T)[k][l] = 0`.
type Condition = (usize, usize);

struct Search<'a> {
    a: &'a Matrix<RatFun>,
    conds: &'a [Condition],
    frozen: &'a [bool],
    budget: usize,
}

impl Search<'_> {
    fn value(&self, m: &Matrix<RatFun>, (k, l): Condition) -> RatFun {
        bilinear(self.a, &m[k], &m[l])
    }

    /// Values of `c` making condition `cond` hold after `m[r] += c * e_j`.
    fn roots(&self, m: &Matrix<RatFun>, cond: Condition, r: usize, j: usize) -> Vec<RatFun> {
        let n = m.len();
        let mut ej = vec![RatFun::zero(); n];
        ej[j] = RatFun::one();
        let (k, l) = cond;
        let a0 = self.value(m, cond);
        let (a1, a2) = if k == l {
            (&RatFun::integer(2) * &bilinear(self.a, &m[r], &ej), self.a[j][j].clone())
        } else {
            let other = if r == k { l } else { k };
            (bilinear(self.a, &m[other], &ej), RatFun::zero())
        };
        if a2.is_zero() {
            if a1.is_zero() {
                return Vec::new();
            }
            return vec![-&a0.checked_div(&a1).expect("nonzero")];
        }
        let disc = &(&a1 * &a1) - &(&RatFun::integer(4) * &(&a0 * &a2));
        let two_a2 = &RatFun::integer(2) * &a2;
        let Some(sq) = disc.sqrt() else { return Vec::new() };
        let mut out = vec![(&-&a1 + &sq).checked_div(&two_a2).expect("nonzero")];
        if !sq.is_zero() {
            out.push((&-&a1 - &sq).checked_div(&two_a2).expect("nonzero"));
        }
        out
    }

    fn run(&mut self, m: Matrix<RatFun>, used: &mut BTreeSet<(usize, usize)>) -> Result<Option<Matrix<RatFun>>> {
        let Some(pos) = self.conds.iter().position(|&c| !self.value(&m, c).is_zero()) else {
            return Ok(Some(m));
        };
        let (k, l) = self.conds[pos];
        let rows: Vec<usize> = if k == l { vec![k] } else { vec![l, k] };
        let n = m.len();
        for r in rows.into_iter().filter(|&r| !self.frozen[r]) {
            for j in (0..n).filter(|&j| j != r) {
                if used.contains(&(r, j)) {
                    continue;
                }
                for c in self.roots(&m, (k, l), r, j) {
                    if c.is_zero() {
                        continue;
                    }
                    if self.budget == 0 {
                        return Err(Error::SearchBudgetExceeded(SEARCH_BUDGET));
                    }
                    self.budget -= 1;
                    let mut next = m.clone();
                    next[r][j] = &next[r][j] + &c;
                    if self.conds[..=pos].iter().any(|&c| !self.value(&next, c).is_zero()) {
                        continue;
                    }
                    if linalg::determinant(&next).is_zero() {
                        continue;
                    }
                    used.insert((r, j));
                    if let Some(found) = self.run(next, used)? {
                        return Ok(Some(found));
                    }
                    used.remove(&(r, j));
                }
            }
        }
        Ok(None)
    }
}

/// Finds a transform in the unit-triangular-plus-scaling family that removes
/// the `eliminate` terms, leaving `frozen` variables untouched.
///
/// Each non-frozen new variable is its old variable plus multiples of other
/// old variables; conditions are solved one at a time, in key order, and the
/// search backtracks over the choice of row and column. Afterwards each
/// perfect-square diagonal coefficient of a non-frozen variable is scaled to 1.
pub fn derive_reduction(p: &DiffPoly, eliminate: &BTreeSet<DerivKey>, frozen: &BTreeSet<String>) -> Result<CanonReport> {
    let vars = p.vars();
    let n = vars.len();
    let mut is_frozen = vec![false; n];
    for name in frozen {
        let i = vars
            .index_of(name)
            .ok_or_else(|| Error::InvalidTarget(format!("cannot freeze unknown variable `{name}`")))?;
        is_frozen[i] = true;
    }
    let mut conds = Vec::new();
    for key in eliminate {
        let printed = || {
            let mut s = String::new();
            crate::diffpoly::write_key(&mut s, key, vars, crate::diffpoly::Notation::Subscript).ok();
            s
        };
        if key.len() != n || key.order() != 2 {
            return Err(Error::InvalidTarget(format!("`{}` is not a second-order derivative", printed())));
        }
        if p.linear_coefficient(key).is_zero() {
            return Err(Error::InvalidTarget(format!("`{}` does not occur linearly", printed())));
        }
        let idx: Vec<usize> = key.support().collect();
        conds.push(match idx[..] {
            [i] => (i, i),
            [i, j] => (i, j),
            _ => unreachable!("second-order key has one or two variables"),
        });
    }

    let a = principal_matrix(p);
    let mut search = Search {
        a: &a.entries,
        conds: &conds,
        frozen: &is_frozen,
        budget: SEARCH_BUDGET,
    };
    let mut m = search
        .run(linalg::identity(n), &mut BTreeSet::new())?
        .ok_or_else(|| Error::NoSolution("no transform in the unit-triangular family removes these terms".into()))?;

    let keep: Vec<bool> = is_frozen.clone();
    let target = primed_names(vars, &keep);
    let mut notes = Vec::new();
    for r in (0..n).filter(|&r| !is_frozen[r]) {
        let d = bilinear(&a.entries, &m[r], &m[r]);
        if d.is_zero() || d.is_one() {
            continue;
        }
        match d.sqrt() {
            Some(s) => {
                let inv = s.inv().expect("nonzero");
                for c in m[r].iter_mut() {
                    *c = &*c * &inv;
                }
            }
            None => notes.push(not_square_note(target.name(r), &d)),
        }
    }

    let transform = AffineTransform::new(vars.clone(), target.clone(), m, vec![RatFun::zero(); n])?;
    let principal = a.transformed(transform.matrix(), target.clone());
    let reduced = pullback(p, &transform)?;
    if principal_matrix(&reduced) != principal || conds.iter().any(|&(k, l)| !principal.get(k, l).is_zero()) {
        return Err(Error::NoSolution("candidate transform failed verification".into()));
    }
    let diag = principal.diag();
    Ok(CanonReport {
        degeneracy: degeneracy_of(&transform, &diag),
        diagonal: diag,
        principal,
        transform,
        normalization_notes: notes,
    })
}

impl fmt::Display for CanonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "transform: {}", self.transform)?;
        let diag: Vec<String> = self.diagonal.iter().map(ToString::to_string).collect();
        writeln!(f, "diagonal: ({})", diag.join(", "))?;
        write!(f, "degeneracy: {}", self.degeneracy)?;
        for n in &self.normalization_notes {
            write!(f, "\nnote: {n}")?;
        }
        Ok(())
    }
}
