//! Affine changes of independent variables and the induced action on
//! differential polynomials.
//!
//! A transform `new = M * old + offset` rewrites each old partial derivative
//! as `d/d old_j = sum_i M[i][j] d/d new_i`. Only `M` enters the pullback;
//! the offset matters for composition, inversion and point evaluation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::coeff::{gcd, MPoly, Param, PowerProduct, RatFun, Q};
use crate::diffpoly::{DerivKey, DiffMonomial, DiffPoly, VarSet};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineTransform {
    source: VarSet,
    target: VarSet,
    matrix: Vec<Vec<RatFun>>,
    offset: Vec<RatFun>,
}

impl AffineTransform {
    /// Row `i` of `matrix` and `offset[i]` define `target[i]` in terms of the source variables.
    pub fn new(source: VarSet, target: VarSet, matrix: Vec<Vec<RatFun>>, offset: Vec<RatFun>) -> Result<Self> {
        let n = source.len();
        if target.len() != n || matrix.len() != n || offset.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "transform from {} variables needs a square {n}x{n} matrix and {n} offsets",
                n
            )));
        }
        Ok(AffineTransform {
            source,
            target,
            matrix,
            offset,
        })
    }

    pub fn identity(vars: &VarSet) -> Self {
        let n = vars.len();
        AffineTransform {
            source: vars.clone(),
            target: vars.clone(),
            matrix: linalg::identity(n),
            offset: (0..n).map(|_| RatFun::zero()).collect(),
        }
    }

    pub fn source(&self) -> &VarSet {
        &self.source
    }

    pub fn target(&self) -> &VarSet {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<RatFun>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[RatFun] {
        &self.offset
    }

    pub fn determinant(&self) -> RatFun {
        linalg::determinant(&self.matrix)
    }

    /// True when the matrix is the identity and the offset vanishes.
    pub fn is_identity(&self) -> bool {
        self.matrix == linalg::identity::<RatFun>(self.source.len()) && self.offset.iter().all(RatFun::is_zero)
    }

    /// Same transform with the target variables renamed.
    pub fn with_target(&self, target: VarSet) -> Result<Self> {
        AffineTransform::new(self.source.clone(), target, self.matrix.clone(), self.offset.clone())
    }

    /// Maps a numeric point given in source coordinates to target coordinates.
    pub fn apply_point(&self, params: &BTreeMap<Param, Q>, point: &[Q]) -> Result<Vec<Q>> {
        let m = self.numeric_matrix(params)?;
        let o = self
            .offset
            .iter()
            .map(|c| c.eval(params))
            .collect::<Result<Vec<_>>>()?;
        Ok(linalg::mat_vec(&m, point).into_iter().zip(o).map(|(a, b)| a + b).collect())
    }

    pub fn numeric_matrix(&self, params: &BTreeMap<Param, Q>) -> Result<Vec<Vec<Q>>> {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|c| c.eval(params)).collect())
            .collect()
    }

    pub fn params(&self) -> BTreeSet<Param> {
        self.matrix
            .iter()
            .flatten()
            .chain(&self.offset)
            .flat_map(RatFun::params)
            .collect()
    }
}

impl fmt::Display for AffineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.matrix.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} = ", self.target.name(i))?;
            let mut first = true;
            let terms = row
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (c.clone(), Some(self.source.name(j))))
                .chain((!self.offset[i].is_zero()).then(|| (self.offset[i].clone(), None)));
            for (c, var) in terms {
                let neg = c.is_negative();
                let abs = if neg { -&c } else { c };
                match (first, neg) {
                    (true, true) => f.write_str("-")?,
                    (true, false) => {}
                    (false, true) => f.write_str(" - ")?,
                    (false, false) => f.write_str(" + ")?,
                }
                first = false;
                let coef = if abs.den().is_one() && abs.num().len() > 1 {
                    format!("({abs})")
                } else {
                    format!("{abs}")
                };
                match var {
                    Some(v) if abs.is_one() => f.write_str(v)?,
                    Some(v) => write!(f, "{coef}*{v}")?,
                    None => f.write_str(&coef)?,
                }
            }
            if first {
                f.write_str("0")?;
            }
        }
        Ok(())
    }
}

/// Parameter conditions under which a transform or reduction is valid.
///
/// Each entry is a polynomial that must not vanish. Entries are split into
/// single-parameter factors plus a remaining cofactor, made primitive with a
/// positive leading coefficient, and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegeneracyReport {
    conditions: BTreeSet<MPoly>,
}

impl DegeneracyReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_polys<I: IntoIterator<Item = MPoly>>(polys: I) -> Self {
        let mut r = Self::new();
        for p in polys {
            r.insert(&p);
        }
        r
    }

    /// Records `p != 0`; constants carry no condition.
    pub fn insert(&mut self, p: &MPoly) {
        if p.is_constant() {
            return;
        }
        let content = monomial_content(p);
        for (param, _) in content.iter() {
            self.conditions.insert(MPoly::var(param.clone()));
        }
        let cofactor = p
            .div_exact(&MPoly::term(content, Q::from_integer(1.into())))
            .expect("monomial content divides");
        if !cofactor.is_constant() {
            self.conditions.insert(cofactor.normalized());
        }
    }

    /// Records both numerator and denominator of `c`.
    pub fn insert_ratfun(&mut self, c: &RatFun) {
        self.insert(c.num());
        self.insert(c.den());
    }

    pub fn merge(&mut self, other: &DegeneracyReport) {
        self.conditions.extend(other.conditions.iter().cloned());
    }

    pub fn conditions(&self) -> impl Iterator<Item = &MPoly> {
        self.conditions.iter()
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    /// Whether `p` (up to a constant factor) is one of the recorded conditions.
    pub fn contains(&self, p: &MPoly) -> bool {
        !p.is_constant() && self.conditions.contains(&p.normalized())
    }

    /// The first condition that vanishes at `params`, if any.
    pub fn violated_at(&self, params: &BTreeMap<Param, Q>) -> Option<&MPoly> {
        self.conditions
            .iter()
            .find(|c| c.eval(params).map(|v| num_traits::Zero::is_zero(&v)).unwrap_or(false))
    }
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditions.is_empty() {
            return f.write_str("none");
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c} != 0")?;
        }
        Ok(())
    }
}

fn monomial_content(p: &MPoly) -> PowerProduct {
    let mut terms = p.terms();
    let Some((first, _)) = terms.next() else {
        return PowerProduct::one();
    };
    terms.fold(first.clone(), |acc, (m, _)| acc.gcd(m))
}

fn singular(det: &RatFun) -> Error {
    Error::SingularTransform { det: det.num().clone() }
}

/// `M = N / d` with `N` polynomial and `d` a common denominator of all entries.
fn split_denominator(matrix: &[Vec<RatFun>]) -> (Vec<Vec<MPoly>>, MPoly) {
    let mut d = MPoly::one();
    for c in matrix.iter().flatten() {
        let g = gcd(&d, c.den());
        d = &d * &c.den().div_exact(&g).expect("gcd divides");
    }
    let n = matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| &c.num().clone() * &d.div_exact(c.den()).expect("common denominator"))
                .collect()
        })
        .collect();
    (n, d)
}

/// Image of a source derivative key under `N`, as a map from target keys to
/// polynomial coefficients. The true image is this divided by `d^order`.
fn key_image(key: &DerivKey, n_matrix: &[Vec<MPoly>]) -> BTreeMap<DerivKey, MPoly> {
    let n = n_matrix.len();
    let mut op: BTreeMap<DerivKey, MPoly> = BTreeMap::new();
    op.insert(DerivKey::zero(n), MPoly::one());
    for j in 0..n {
        for _ in 0..key.get(j) {
            let mut next: BTreeMap<DerivKey, MPoly> = BTreeMap::new();
            for (k, c) in &op {
                for (i, row) in n_matrix.iter().enumerate() {
                    let m = &row[j];
                    if m.is_zero() {
                        continue;
                    }
                    let e = next.entry(k.bumped(i)).or_insert_with(MPoly::zero);
                    *e = &*e + &(c * m);
                }
            }
            next.retain(|_, c| !c.is_zero());
            op = next;
        }
    }
    op
}

type MonoImage = BTreeMap<DiffMonomial, MPoly>;

fn mul_images(a: &MonoImage, b: &MonoImage) -> MonoImage {
    let mut out = MonoImage::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let e = out.entry(ma.mul(mb)).or_insert_with(MPoly::zero);
            *e = &*e + &(ca * cb);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Rewrites `p` (over the source variables) in the target variables.
///
/// A monomial of weighted order `w` maps to monomials of the same weighted
/// order with coefficients over `d^w`, so each output coefficient needs only
/// one division at the end.
pub fn pullback(p: &DiffPoly, t: &AffineTransform) -> Result<DiffPoly> {
    if p.vars() != &t.source {
        return Err(Error::DimensionMismatch(format!(
            "polynomial over ({}) but transform from ({})",
            p.vars(),
            t.source
        )));
    }
    let det = t.determinant();
    if det.is_zero() {
        return Err(singular(&det));
    }
    let (n_matrix, d) = split_denominator(&t.matrix);
    let mut keys: BTreeMap<DerivKey, MonoImage> = BTreeMap::new();
    // per target monomial: weighted order and numerators grouped by the source coefficient's denominator
    let mut acc: BTreeMap<DiffMonomial, (u32, Vec<(MPoly, MPoly)>)> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut image = MonoImage::new();
        image.insert(DiffMonomial::one(), MPoly::one());
        for (key, e) in m.factors() {
            let k = keys.entry(key.clone()).or_insert_with(|| {
                key_image(key, &n_matrix)
                    .into_iter()
                    .map(|(k, c)| (DiffMonomial::factor(k), c))
                    .collect()
            });
            for _ in 0..*e {
                image = mul_images(&image, k);
            }
        }
        let w = m.weighted_order();
        for (tm, poly) in image {
            let (_, groups) = acc.entry(tm).or_insert_with(|| (w, Vec::new()));
            let contribution = c.num() * &poly;
            match groups.iter_mut().find(|(den, _)| den == c.den()) {
                Some((_, num)) => *num = &*num + &contribution,
                None => groups.push((c.den().clone(), contribution)),
            }
        }
    }
    let terms = acc.into_iter().map(|(tm, (w, groups))| {
        let c = groups.into_iter().fold(RatFun::zero(), |sum, (den, num)| {
            &sum + &RatFun::new(num, den).expect("denominators are nonzero")
        });
        (tm, c.div_by_power(&d, w))
    });
    Ok(DiffPoly::from_terms(&t.target, terms))
}

pub fn invert_transform(t: &AffineTransform) -> Result<AffineTransform> {
    let inv = linalg::inverse(&t.matrix).ok_or_else(|| singular(&t.determinant()))?;
    let offset = linalg::mat_vec(&inv, &t.offset).into_iter().map(|c| -c).collect();
    AffineTransform::new(t.target.clone(), t.source.clone(), inv, offset)
}

/// `second` after `first`: source of `first` to target of `second`.
pub fn compose(second: &AffineTransform, first: &AffineTransform) -> Result<AffineTransform> {
    if second.source != first.target {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: ({}) does not match ({})",
            first.target, second.source
        )));
    }
    let matrix = linalg::mat_mul(&second.matrix, &first.matrix);
    let offset = linalg::mat_vec(&second.matrix, &first.offset)
        .into_iter()
        .zip(&second.offset)
        .map(|(a, b)| &a + b)
        .collect();
    AffineTransform::new(first.source.clone(), second.target.clone(), matrix, offset)
}

/// Nonvanishing conditions: denominators of the entries and the determinant.
pub fn validity_conditions(t: &AffineTransform) -> DegeneracyReport {
    let mut r = DegeneracyReport::new();
    for c in t.matrix.iter().flatten().chain(&t.offset) {
        r.insert(c.den());
    }
    let det = t.determinant();
    r.insert(det.num());
    r
}
