use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{missing, rational_sqrt, Param, Q};
use crate::error::Result;

/// A power product of parameters, sparse and sorted by parameter name.
/// Exponents are always positive; the empty product is `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PowerProduct(Vec<(Param, u32)>);

impl PowerProduct {
    pub fn one() -> Self {
        PowerProduct(Vec::new())
    }

    pub fn var(p: Param) -> Self {
        PowerProduct(vec![(p, 1)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (Param, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<Param, u32> = BTreeMap::new();
        for (p, e) in pairs {
            *map.entry(p).or_insert(0) += e;
        }
        PowerProduct(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, p: &Param) -> u32 {
        self.0
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, e)| *e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Param, u32)> {
        self.0.iter().map(|(p, e)| (p, *e))
    }

    fn merge_with(&self, other: &Self, f: impl Fn(u32, u32) -> Option<u32>) -> Option<Self> {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            let (p, ea, eb) = match (a.get(i), b.get(j)) {
                (Some((pa, ea)), Some((pb, eb))) => match pa.cmp(pb) {
                    Ordering::Less => {
                        i += 1;
                        (pa, *ea, 0)
                    }
                    Ordering::Greater => {
                        j += 1;
                        (pb, 0, *eb)
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (pa, *ea, *eb)
                    }
                },
                (Some((pa, ea)), None) => {
                    i += 1;
                    (pa, *ea, 0)
                }
                (None, Some((pb, eb))) => {
                    j += 1;
                    (pb, 0, *eb)
                }
                (None, None) => unreachable!(),
            };
            let e = f(ea, eb)?;
            if e > 0 {
                out.push((p.clone(), e));
            }
        }
        Some(PowerProduct(out))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.merge_with(other, |a, b| Some(a + b)).unwrap()
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Self) -> Option<Self> {
        self.merge_with(other, |a, b| a.checked_sub(b))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        self.merge_with(other, |a, b| Some(a.min(b))).unwrap()
    }

    pub fn pow(&self, k: u32) -> Self {
        PowerProduct(self.0.iter().map(|(p, e)| (p.clone(), e * k)).filter(|(_, e)| *e > 0).collect())
    }

    fn halve(&self) -> Option<Self> {
        self.0
            .iter()
            .map(|(p, e)| (e % 2 == 0).then(|| (p.clone(), e / 2)))
            .collect::<Option<Vec<_>>>()
            .map(PowerProduct)
    }

    fn without(&self, v: &Param) -> Self {
        PowerProduct(self.0.iter().filter(|(p, _)| p != v).cloned().collect())
    }
}

/// Graded lexicographic order: total degree first, then the exponent of the
/// alphabetically first parameter, and so on. Larger compares greater.
impl Ord for PowerProduct {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        for k in 0.. {
            match (a.get(k), b.get(k)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((pa, ea)), Some((pb, eb))) => match pa.cmp(pb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                },
            }
        }
        unreachable!()
    }
}

impl PartialOrd for PowerProduct {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (p, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse multivariate polynomial with rational coefficients.
/// No zero coefficient is ever stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MPoly {
    terms: BTreeMap<PowerProduct, Q>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn one() -> Self {
        MPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        MPoly::term(PowerProduct::one(), c)
    }

    pub fn integer(n: i64) -> Self {
        MPoly::constant(Q::from_integer(BigInt::from(n)))
    }

    pub fn var(p: Param) -> Self {
        MPoly::term(PowerProduct::var(p), Q::one())
    }

    pub fn term(m: PowerProduct, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (PowerProduct, Q)>>(terms: I) -> Self {
        let mut p = MPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&PowerProduct::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending term order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&PowerProduct, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &PowerProduct) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn leading(&self) -> Option<(&PowerProduct, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> Q {
        self.leading().map_or_else(Q::zero, |(_, c)| c.clone())
    }

    pub fn params(&self) -> BTreeSet<Param> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|(p, _)| p.clone()))
            .collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(PowerProduct::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &Param) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: PowerProduct, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &PowerProduct, c: &Q) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(n, a)| (n.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut acc = MPoly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, v: &Param) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let reduced = m.div(&PowerProduct::var(v.clone())).unwrap();
            out.add_term(reduced, c * Q::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn eval(&self, assignment: &BTreeMap<Param, Q>) -> Result<Q> {
        let mut sum = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (p, e) in m.iter() {
                let v = assignment.get(p).ok_or_else(|| missing(p))?;
                t *= num_traits::pow(v.clone(), e as usize);
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Simultaneous substitution of polynomials for parameters; parameters
    /// absent from `map` are kept.
    pub fn compose(&self, map: &BTreeMap<Param, MPoly>) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let mut t = MPoly::constant(c.clone());
            for (p, e) in m.iter() {
                let f = match map.get(p) {
                    Some(f) => f.pow(e),
                    None => MPoly::term(PowerProduct::from_pairs([(p.clone(), e)]), Q::one()),
                };
                t = &t * &f;
            }
            out = &out + &t;
        }
        out
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut q = MPoly::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.div(&dm)?;
            let c = rc / &dc;
            r = &r - &d.mul_term(&m, &c);
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Splits `self = c * p` with `p` having coprime integer coefficients and
    /// a positive leading coefficient. The zero polynomial gives `(0, 0)`.
    pub fn primitive_integer(&self) -> (Q, MPoly) {
        if self.is_zero() {
            return (Q::zero(), MPoly::zero());
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * (&lcm / c.denom());
            g = g.gcd(&n);
        }
        let mut content = Q::new(g, lcm);
        if self.leading_coefficient().is_negative() {
            content = -content;
        }
        let p = self.scale(&(Q::one() / &content));
        (content, p)
    }

    /// Primitive integer associate with positive leading coefficient.
    pub fn normalized(&self) -> MPoly {
        self.primitive_integer().1
    }

    fn smallest_param(&self) -> Option<Param> {
        self.terms
            .keys()
            .filter_map(|m| m.iter().next().map(|(p, _)| p.clone()))
            .min()
    }

    /// Coefficients as a polynomial in `v`, indexed by power of `v`.
    fn to_univariate(&self, v: &Param) -> Vec<MPoly> {
        let mut coeffs = vec![MPoly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(v) as usize;
            coeffs[e].add_term(m.without(v), c.clone());
        }
        coeffs
    }

    fn content_in(&self, v: &Param) -> MPoly {
        self.to_univariate(v)
            .iter()
            .filter(|c| !c.is_zero())
            .fold(MPoly::zero(), |g, c| if g.is_one() { g } else { gcd(&g, c) })
    }

    fn primitive_part_in(&self, v: &Param) -> MPoly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides")
    }

    /// Square root in `Q[params]`, if `self` is a perfect square. The root
    /// returned has positive leading coefficient.
    pub fn sqrt(&self) -> Option<MPoly> {
        let Some((lm, lc)) = self.leading() else {
            return Some(MPoly::zero());
        };
        let root_m = lm.halve()?;
        let root_c = rational_sqrt(lc)?;
        let mut root = MPoly::term(root_m.clone(), root_c.clone());
        let two_lc = &root_c * Q::from_integer(BigInt::from(2));
        loop {
            let r = self - &root.pow(2);
            let Some((rm, rc)) = r.leading() else {
                return Some(root);
            };
            let m = rm.div(&root_m)?;
            if m >= root_m {
                return None;
            }
            root.add_term(m, rc / &two_lc);
        }
    }

    pub(crate) fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }
}

/// Greatest common divisor in `Q[params]`, normalized to a primitive integer
/// polynomial with positive leading coefficient (`0` only if both are `0`).
///
/// Recursive primitive polynomial remainder sequence in the alphabetically
/// smallest parameter, with contents computed over the remaining ones.
pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() {
        return b.normalized();
    }
    if b.is_zero() {
        return a.normalized();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one();
    }
    if a.is_monomial() || b.is_monomial() {
        return monomial_gcd(a, b);
    }
    let (small, big) = if a.total_degree() <= b.total_degree() { (a, b) } else { (b, a) };
    if big.div_exact(small).is_some() {
        return small.normalized();
    }
    let (fa, fb) = (a.normalized(), b.normalized());
    let vars: Vec<Param> = fa.params().union(&fb.params()).cloned().collect();
    if let Some(h) = heuristic_gcd(&fa, &fb, &vars) {
        return h.normalized();
    }
    let v = match (a.smallest_param(), b.smallest_param()) {
        (Some(x), Some(y)) => x.min(y),
        _ => unreachable!("nonconstant polynomials mention a parameter"),
    };
    let (da, db) = (a.degree_in(&v), b.degree_in(&v));
    if da == 0 {
        return gcd(a, &b.content_in(&v));
    }
    if db == 0 {
        return gcd(&a.content_in(&v), b);
    }
    let (ca, cb) = (a.content_in(&v), b.content_in(&v));
    let content = gcd(&ca, &cb);
    let mut f = a.div_exact(&ca).expect("content divides").normalized();
    let mut g = b.div_exact(&cb).expect("content divides").normalized();
    if f.degree_in(&v) < g.degree_in(&v) {
        core::mem::swap(&mut f, &mut g);
    }
    let prs = loop {
        let r = pseudo_remainder(&f, &g, &v);
        if r.is_zero() {
            break g;
        }
        if r.degree_in(&v) == 0 {
            break MPoly::one();
        }
        f = g;
        g = r.primitive_part_in(&v).normalized();
    };
    (&content * &prs.primitive_part_in(&v)).normalized()
}

const HEURISTIC_TRIES: usize = 6;

fn max_norm(p: &MPoly) -> BigInt {
    p.terms.values().map(|c| c.numer().abs()).max().unwrap_or_default()
}

/// `p` with `v` replaced by the integer `xi`.
fn eval_at(p: &MPoly, v: &Param, xi: &BigInt) -> MPoly {
    let mut out = MPoly::zero();
    for (m, c) in &p.terms {
        let e = m.exponent(v);
        out.add_term(m.without(v), c * Q::from_integer(num_traits::pow(xi.clone(), e as usize)));
    }
    out
}

/// Inverse of [`eval_at`] for polynomials with coefficients below `xi / 2`:
/// the balanced `xi`-adic digits of each coefficient become the powers of `v`.
fn interpolate(h: &MPoly, v: &Param, xi: &BigInt) -> MPoly {
    let half = xi / 2;
    let mut rest: BTreeMap<PowerProduct, BigInt> = h.terms.iter().map(|(m, c)| (m.clone(), c.to_integer())).collect();
    let mut out = MPoly::zero();
    let mut k = 0u32;
    while !rest.is_empty() {
        let vk = PowerProduct::var(v.clone()).pow(k);
        let mut next = BTreeMap::new();
        for (m, c) in rest {
            let mut r = c.mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                out.add_term(m.mul(&vk), Q::from_integer(r.clone()));
            }
            let q = (c - r) / xi;
            if !q.is_zero() {
                next.insert(m, q);
            }
        }
        rest = next;
        k += 1;
    }
    out
}

/// Heuristic gcd of integer polynomials: evaluate one variable at a large
/// integer, recurse, and lift the result back by balanced `xi`-adic
/// expansion. A candidate is accepted only if it divides both inputs, which
/// for `xi` above twice the smaller coefficient bound makes it the gcd.
/// `None` when no evaluation point succeeds.
fn heuristic_gcd(f: &MPoly, g: &MPoly, vars: &[Param]) -> Option<MPoly> {
    let Some((v, rest)) = vars.split_first() else {
        let (a, b) = (f.as_constant()?.to_integer(), g.as_constant()?.to_integer());
        return Some(MPoly::constant(Q::from_integer(a.gcd(&b))));
    };
    let (cf, f) = f.primitive_integer();
    let (cg, g) = g.primitive_integer();
    let content = cf.numer().abs().gcd(&cg.numer().abs());
    let (nf, ng) = (max_norm(&f), max_norm(&g));
    let bound = BigInt::from(2) * nf.clone().min(ng.clone()) + BigInt::from(29);
    let lc_ratio = |n: &BigInt, p: &MPoly| n / p.leading_coefficient().numer().abs();
    let mut xi = bound.max(BigInt::from(2) * lc_ratio(&nf, &f).min(lc_ratio(&ng, &g)) + BigInt::from(4));
    for _ in 0..HEURISTIC_TRIES {
        let (ff, gg) = (eval_at(&f, v, &xi), eval_at(&g, v, &xi));
        if !ff.is_zero() && !gg.is_zero() {
            if let Some(h) = heuristic_gcd(&ff, &gg, rest) {
                let cand = interpolate(&h, v, &xi).normalized();
                if !cand.is_zero() && f.div_exact(&cand).is_some() && g.div_exact(&cand).is_some() {
                    return Some(cand.scale(&Q::from_integer(content)));
                }
            }
        }
        let root = num_integer::Roots::sqrt(&num_integer::Roots::sqrt(&xi));
        xi = BigInt::from(73794) * &xi * root / BigInt::from(27011);
    }
    None
}

fn monomial_gcd(a: &MPoly, b: &MPoly) -> MPoly {
    let mut m: Option<PowerProduct> = None;
    for k in a.terms.keys().chain(b.terms.keys()) {
        m = Some(match m {
            None => k.clone(),
            Some(acc) => acc.gcd(k),
        });
    }
    MPoly::term(m.unwrap_or_default(), Q::one())
}

/// Sparse pseudo-remainder of `f` by `g` as polynomials in `v`.
fn pseudo_remainder(f: &MPoly, g: &MPoly, v: &Param) -> MPoly {
    let gc = g.to_univariate(v);
    let n = gc.len() - 1;
    let lg = &gc[n];
    let mut r = f.clone();
    loop {
        let dr = r.degree_in(v) as usize;
        if r.is_zero() || dr < n {
            return r;
        }
        let rc = r.to_univariate(v);
        let lr = &rc[dr];
        let shift = PowerProduct::var(v.clone()).pow((dr - n) as u32);
        r = &(&r * lg) - &(lr * g).mul_term(&shift, &Q::one());
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<MPoly> for MPoly {
            type Output = MPoly;
            fn $m(self, rhs: MPoly) -> MPoly {
                (&self).$m(&rhs)
            }
        }
    };
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

/// Terms are printed from the leading term down, e.g. `alpha^2 - 4`.
impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}
