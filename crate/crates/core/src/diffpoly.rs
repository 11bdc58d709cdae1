//! Differential polynomials in one unknown `u`.
//!
//! A [`DiffPoly`] is a finite sum of coefficient times product of partial
//! derivatives of `u`, with coefficients in `Q(params)`. Derivatives are
//! multi-indices, so `u_xt` and `u_tx` are the same key. Values are kept in
//! normal form at all times: like terms collected, zero coefficients dropped,
//! terms ordered by [`DiffMonomial`]'s ordering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};


use crate::coeff::{Param, RatFun};
use crate::error::{Error, Result};

/// Ordered list of independent variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(Vec<String>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidVarSet("no independent variables".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() || n == "u" {
                return Err(Error::InvalidVarSet(format!("`{n}` is not a valid variable name")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidVarSet(format!("`{n}` declared twice")));
            }
        }
        Ok(VarSet(names))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn subset(&self, indices: &[usize]) -> VarSet {
        VarSet(indices.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

/// Multi-index of a partial derivative, one order per variable of the VarSet.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivKey(Vec<u32>);

impl DerivKey {
    /// The key of `u` itself.
    pub fn zero(nvars: usize) -> Self {
        DerivKey(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut k = DerivKey::zero(nvars);
        k.0[var] = 1;
        k
    }

    pub fn from_orders(orders: Vec<u32>) -> Self {
        DerivKey(orders)
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    /// Total order of the derivative.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn bumped(&self, var: usize) -> DerivKey {
        let mut k = self.clone();
        k.0[var] += 1;
        k
    }

    pub fn combined(&self, other: &DerivKey) -> DerivKey {
        DerivKey(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Positions of the variables the key differentiates in.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &o)| o > 0).map(|(i, _)| i)
    }
}

/// Lower total order first; at equal order, more derivatives in an earlier
/// variable first (`u_tt < u_tx < u_xx` over `t,x`).
impl Ord for DerivKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for DerivKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Product of derivative factors with positive exponents, sorted by key.
/// The empty product is the `u`-free monomial `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffMonomial(Vec<(DerivKey, u32)>);

impl DiffMonomial {
    pub fn one() -> Self {
        DiffMonomial(Vec::new())
    }

    pub fn factor(key: DerivKey) -> Self {
        DiffMonomial(vec![(key, 1)])
    }

    pub fn from_factors<I: IntoIterator<Item = (DerivKey, u32)>>(factors: I) -> Self {
        let mut map: BTreeMap<DerivKey, u32> = BTreeMap::new();
        for (k, e) in factors {
            *map.entry(k).or_insert(0) += e;
        }
        DiffMonomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(DerivKey, u32)] {
        &self.0
    }

    /// Degree in `u` and its derivatives.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Sum of derivative orders over all factors, with multiplicity.
    pub fn weighted_order(&self) -> u32 {
        self.0.iter().map(|(k, e)| k.order() * e).sum()
    }

    pub fn max_order(&self) -> u32 {
        self.0.iter().map(|(k, _)| k.order()).max().unwrap_or(0)
    }

    /// Factor orders with multiplicity, ascending.
    pub fn order_profile(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .0
            .iter()
            .flat_map(|(k, e)| core::iter::repeat_n(k.order(), *e as usize))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn mul(&self, other: &DiffMonomial) -> DiffMonomial {
        DiffMonomial::from_factors(self.0.iter().chain(&other.0).cloned())
    }

    pub fn map_keys(&self, f: impl Fn(&DerivKey) -> DerivKey) -> DiffMonomial {
        DiffMonomial::from_factors(self.0.iter().map(|(k, e)| (f(k), *e)))
    }

    fn expanded(&self) -> impl Iterator<Item = &DerivKey> {
        self.0
            .iter()
            .flat_map(|(k, e)| core::iter::repeat_n(k, *e as usize))
    }
}

/// Weighted derivative order, then degree in `u`, then the factor lists
/// (with multiplicity) compared lexicographically. This gives
/// `u_tt, u_xx, u*u_xx, u_x^2, u_xxxx` for the Boussinesq terms.
impl Ord for DiffMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weighted_order()
            .cmp(&other.weighted_order())
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| self.expanded().cmp(other.expanded()))
    }
}

impl PartialOrd for DiffMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// How derivatives are rendered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Notation {
    /// `u_xt` when every variable involved has a one-letter name (primes
    /// allowed), `D[u,{tau,2}]` otherwise.
    #[default]
    Subscript,
    /// Always `D[u,{t,1},{x,1}]`.
    Explicit,
}

fn subscript_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c == '\'')
}

pub(crate) fn write_key(f: &mut dyn fmt::Write, key: &DerivKey, vars: &VarSet, notation: Notation) -> fmt::Result {
    if key.order() == 0 {
        return f.write_str("u");
    }
    let subscript = notation == Notation::Subscript && key.support().all(|i| subscript_name(vars.name(i)));
    if subscript {
        f.write_str("u_")?;
        for (i, &o) in key.orders().iter().enumerate() {
            for _ in 0..o {
                f.write_str(vars.name(i))?;
            }
        }
        Ok(())
    } else {
        f.write_str("D[u")?;
        for i in key.support() {
            write!(f, ",{{{},{}}}", vars.name(i), key.get(i))?;
        }
        f.write_str("]")
    }
}

fn write_monomial(f: &mut dyn fmt::Write, m: &DiffMonomial, vars: &VarSet, notation: Notation) -> fmt::Result {
    if m.is_one() {
        return f.write_str("1");
    }
    for (n, (k, e)) in m.factors().iter().enumerate() {
        if n > 0 {
            f.write_str("*")?;
        }
        write_key(f, k, vars, notation)?;
        if *e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// A differential polynomial over a fixed [`VarSet`], always in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffPoly {
    vars: VarSet,
    terms: BTreeMap<DiffMonomial, RatFun>,
}

impl DiffPoly {
    pub fn zero(vars: &VarSet) -> Self {
        DiffPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &VarSet, c: RatFun) -> Self {
        DiffPoly::from_terms(vars, [(DiffMonomial::one(), c)])
    }

    /// The single derivative `u_key`.
    pub fn u(vars: &VarSet, key: DerivKey) -> Self {
        assert_eq!(key.len(), vars.len(), "derivative key does not match the variable set");
        DiffPoly::from_terms(vars, [(DiffMonomial::factor(key), RatFun::one())])
    }

    /// Collects arbitrary terms into normal form.
    pub fn from_terms<I: IntoIterator<Item = (DiffMonomial, RatFun)>>(vars: &VarSet, terms: I) -> Self {
        let mut p = DiffPoly::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: DiffMonomial, c: RatFun) {
        if c.is_zero() {
            return;
        }
        debug_assert!(m.factors().iter().all(|(k, _)| k.len() == self.vars.len()));
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in normal-form order.
    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &RatFun)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &DiffMonomial) -> RatFun {
        self.terms.get(m).cloned().unwrap_or_else(RatFun::zero)
    }

    /// Coefficient of the linear term `c * u_key`.
    pub fn linear_coefficient(&self, key: &DerivKey) -> RatFun {
        self.coefficient(&DiffMonomial::factor(key.clone()))
    }

    /// The `u`-free part, if the polynomial has nothing else.
    pub fn as_constant(&self) -> Option<RatFun> {
        match self.terms.len() {
            0 => Some(RatFun::zero()),
            1 => self.terms.get(&DiffMonomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn params(&self) -> BTreeSet<Param> {
        self.terms.values().flat_map(RatFun::params).collect()
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(DiffMonomial::max_order).max().unwrap_or(0)
    }

    /// Variables that occur in at least one derivative key, in VarSet order.
    pub fn active_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.vars.len()];
        for m in self.terms.keys() {
            for (k, _) in m.factors() {
                for i in k.support() {
                    used[i] = true;
                }
            }
        }
        (0..self.vars.len()).filter(|&i| used[i]).collect()
    }

    /// Rewrites every key with `f` and places the result over `vars`.
    pub fn map_keys(&self, vars: &VarSet, f: impl Fn(&DerivKey) -> DerivKey) -> DiffPoly {
        DiffPoly::from_terms(vars, self.terms.iter().map(|(m, c)| (m.map_keys(&f), c.clone())))
    }

    /// Same polynomial over a renamed variable set of equal size.
    pub fn with_vars(&self, vars: &VarSet) -> Result<DiffPoly> {
        if vars.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot rename {} variables to {}",
                self.vars.len(),
                vars.len()
            )));
        }
        Ok(DiffPoly {
            vars: vars.clone(),
            terms: self.terms.clone(),
        })
    }

    /// Drops the variables that no derivative mentions.
    pub fn restrict_to_active(&self) -> DiffPoly {
        let active = self.active_vars();
        let vars = if active.is_empty() {
            self.vars.clone()
        } else {
            self.vars.subset(&active)
        };
        if active.is_empty() {
            return self.clone();
        }
        self.map_keys(&vars, |k| DerivKey::from_orders(active.iter().map(|&i| k.get(i)).collect()))
    }

    pub fn scale(&self, c: &RatFun) -> DiffPoly {
        DiffPoly::from_terms(&self.vars, self.terms.iter().map(|(m, a)| (m.clone(), a * c)))
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut acc = DiffPoly::constant(&self.vars, RatFun::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Total derivative in variable `var`: product rule, `D_i u_K = u_{K + e_i}`.
    pub fn total_derivative(&self, var: usize) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            for (idx, (key, e)) in m.factors().iter().enumerate() {
                let mut factors: Vec<(DerivKey, u32)> = m.factors().to_vec();
                factors[idx].1 -= 1;
                factors.push((key.bumped(var), 1));
                let coef = c * &RatFun::integer(i64::from(*e));
                out.add_term(DiffMonomial::from_factors(factors), coef);
            }
        }
        out
    }

    /// Applies the total derivative operator of multi-index `key`.
    pub fn derivative(&self, key: &DerivKey) -> DiffPoly {
        let mut p = self.clone();
        for (var, &o) in key.orders().iter().enumerate() {
            for _ in 0..o {
                p = p.total_derivative(var);
            }
        }
        p
    }

    pub fn display(&self, notation: Notation) -> DisplayDiffPoly<'_> {
        DisplayDiffPoly { p: self, notation }
    }

    pub fn to_string_with(&self, notation: Notation) -> String {
        self.display(notation).to_string()
    }

    /// Renders a single term's monomial, e.g. `u*u_xx`.
    pub fn monomial_string(&self, m: &DiffMonomial, notation: Notation) -> String {
        let mut s = String::new();
        write_monomial(&mut s, m, &self.vars, notation).expect("writing to a String");
        s
    }

    fn check_vars(&self, other: &DiffPoly) {
        assert!(
            self.vars == other.vars,
            "differential polynomials over different variable sets ({} vs {})",
            self.vars,
            other.vars
        );
    }
}

/// Identity on values already in normal form; kept as the named entry point
/// for the normalization contract.
pub fn normal_form(p: &DiffPoly) -> DiffPoly {
    DiffPoly::from_terms(p.vars(), p.terms().map(|(m, c)| (m.clone(), c.clone())))
}

/// Substitutes field elements for parameters in every coefficient.
pub fn subst_params(p: &DiffPoly, assignment: &BTreeMap<Param, RatFun>) -> Result<DiffPoly> {
    let mut out = DiffPoly::zero(p.vars());
    for (m, c) in p.terms() {
        out.add_term(m.clone(), c.subst(assignment)?);
    }
    Ok(out)
}

/// `u -> kappa * u`: a monomial of degree `d` is multiplied by `kappa^d`.
pub fn scale_dependent(p: &DiffPoly, kappa: &RatFun) -> Result<DiffPoly> {
    if kappa.is_zero() {
        return Err(Error::ZeroScale);
    }
    Ok(DiffPoly::from_terms(
        p.vars(),
        p.terms().map(|(m, c)| {
            let k = kappa.pow(m.degree() as i32).expect("nonzero scale");
            (m.clone(), c * &k)
        }),
    ))
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.check_vars(rhs);
        let mut out = DiffPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&RatFun::integer(-1))
    }
}

pub struct DisplayDiffPoly<'a> {
    p: &'a DiffPoly,
    notation: Notation,
}

impl fmt::Display for DisplayDiffPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_zero() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.p.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let coef = if abs.den().is_one() && abs.num().len() > 1 {
                format!("({abs})")
            } else {
                abs.to_string()
            };
            if m.is_one() {
                f.write_str(&coef)?;
            } else {
                if !abs.is_one() {
                    write!(f, "{coef}*")?;
                }
                write_monomial(f, m, &self.p.vars, self.notation)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(Notation::Subscript).fmt(f)
    }
}
